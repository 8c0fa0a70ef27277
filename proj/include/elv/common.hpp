#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace elv {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input data (files, lines, labels, spans).
struct DataError : Error {
  using Error::Error;
};

// Explanation surface string not recognized by the DSL grammar.
struct DslParseError : Error {
  using Error::Error;
};

// Invalid configuration (unknown key, missing key, bad value).
struct ConfigError : Error {
  using Error::Error;
};

// A documented precondition was violated by the caller.
struct ContractError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Anchors and task schema
// ---------------------------------------------------------------------------

enum class Anchor : uint8_t { Term = 0, Subj = 1, Obj = 2 };

inline const char* anchor_name(Anchor a) {
  switch (a) {
    case Anchor::Term: return "TERM";
    case Anchor::Subj: return "SUBJ";
    case Anchor::Obj: return "OBJ";
  }
  return "?";
}

inline bool anchor_from_name(std::string_view s, Anchor& out) {
  if (s == "TERM" || s == "term") { out = Anchor::Term; return true; }
  if (s == "SUBJ" || s == "subj") { out = Anchor::Subj; return true; }
  if (s == "OBJ" || s == "obj") { out = Anchor::Obj; return true; }
  return false;
}

// The two anchor layouts: {TERM} for aspect-style tasks, {SUBJ, OBJ} for
// pair-style tasks.
enum class TaskSchema : uint8_t { Term, SubjObj };

inline std::vector<Anchor> schema_anchors(TaskSchema s) {
  if (s == TaskSchema::Term) return {Anchor::Term};
  return {Anchor::Subj, Anchor::Obj};
}

inline bool schema_has(TaskSchema s, Anchor a) {
  return s == TaskSchema::Term ? a == Anchor::Term
                               : (a == Anchor::Subj || a == Anchor::Obj);
}

inline const char* schema_name(TaskSchema s) {
  return s == TaskSchema::Term ? "term" : "subj_obj";
}

inline TaskSchema schema_from_name(std::string_view s) {
  if (s == "term") return TaskSchema::Term;
  if (s == "subj_obj") return TaskSchema::SubjObj;
  throw ConfigError("unknown schema: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Stable hashing (not std::hash: layout must not vary across platforms)
// ---------------------------------------------------------------------------

inline uint64_t fnv1a64(std::string_view s, uint64_t seed = 1469598103934665603ull) {
  uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Per-module RNG streams derived from one global seed.
inline uint64_t derive_seed(uint64_t global_seed, std::string_view module) {
  return splitmix64(global_seed ^ fnv1a64(module));
}

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Logging, controlled by ELV_LOG (error|warn|info|debug; default warn)
// ---------------------------------------------------------------------------

namespace log {

enum class Level : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline Level level() {
  static Level lv = [] {
    const char* e = std::getenv("ELV_LOG");
    if (!e) return Level::Warn;
    std::string s(e);
    if (s == "error") return Level::Error;
    if (s == "info") return Level::Info;
    if (s == "debug") return Level::Debug;
    return Level::Warn;
  }();
  return lv;
}

inline void emit(Level lv, const char* tag, const std::string& msg) {
  if (static_cast<int>(lv) <= static_cast<int>(level()))
    std::cerr << "[elv " << tag << "] " << msg << '\n';
}

inline void error(const std::string& m) { emit(Level::Error, "error", m); }
inline void warn(const std::string& m) { emit(Level::Warn, "warn", m); }
inline void info(const std::string& m) { emit(Level::Info, "info", m); }
inline void debug(const std::string& m) { emit(Level::Debug, "debug", m); }

}  // namespace log

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline std::string join_tokens(const std::vector<std::string>& toks, char sep = ' ') {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(sep);
    out += toks[i];
  }
  return out;
}

}  // namespace elv
