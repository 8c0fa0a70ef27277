#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elv/common.hpp"
#include "elv/corpus.hpp"

namespace elv {

// ---------------------------------------------------------------------------
// Hashed idf-weighted bag of word uni/bigrams, L2-normalized. A deterministic
// stand-in for a pretrained sentence encoder; the contract is just
// text -> unit vector, so a neural embedder can be dropped in.
// ---------------------------------------------------------------------------

struct EmbedderConfig {
  int dim = 512;
  uint64_t hash_seed = 0x517cc1b727220a95ull;
  bool operator==(const EmbedderConfig&) const = default;
};

class SentenceEmbedder {
 public:
  SentenceEmbedder() = default;
  explicit SentenceEmbedder(EmbedderConfig cfg) : cfg_(cfg) {}

  const EmbedderConfig& config() const { return cfg_; }
  bool fitted() const { return fitted_; }
  size_t doc_count() const { return doc_count_; }

  // Builds the idf table over uni/bigrams of the given texts.
  void fit(const std::vector<std::string>& texts) {
    df_.clear();
    doc_count_ = texts.size();
    for (const auto& t : texts) {
      std::map<std::string, int> seen;
      for (const auto& g : ngrams(t)) seen[g] = 1;
      for (const auto& [g, _] : seen) df_[g] += 1;
    }
    fitted_ = true;
  }

  double idf(const std::string& ngram) const {
    auto it = df_.find(ngram);
    double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(doc_count_)) / (1.0 + df)) + 1.0;
  }

  // Unit-norm vector; the zero vector only for text with no tokens.
  std::vector<double> embed(const std::string& text) const {
    if (!fitted_) throw ContractError("embedder not fitted");
    std::vector<double> v(cfg_.dim, 0.0);
    for (const auto& g : ngrams(text)) {
      uint64_t h = fnv1a64(g, cfg_.hash_seed);
      size_t bucket = h % static_cast<uint64_t>(cfg_.dim);
      double sign = ((h >> 32) & 1u) ? 1.0 : -1.0;
      v[bucket] += sign * idf(g);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    return v;
  }

  json to_json() const {
    json j;
    j["dim"] = cfg_.dim;
    j["hash_seed"] = cfg_.hash_seed;
    j["doc_count"] = doc_count_;
    j["df"] = df_;
    return j;
  }

  static SentenceEmbedder from_json(const json& j) {
    SentenceEmbedder e;
    e.cfg_.dim = j.at("dim").get<int>();
    e.cfg_.hash_seed = j.at("hash_seed").get<uint64_t>();
    e.doc_count_ = j.at("doc_count").get<size_t>();
    e.df_ = j.at("df").get<std::map<std::string, int>>();
    e.fitted_ = true;
    return e;
  }

 private:
  std::vector<std::string> ngrams(const std::string& text) const {
    auto toks = tokenize(text);
    std::vector<std::string> out;
    out.reserve(toks.size() * 2);
    for (const auto& t : toks) out.push_back(t);
    for (size_t i = 0; i + 1 < toks.size(); ++i) out.push_back(toks[i] + ' ' + toks[i + 1]);
    return out;
  }

  EmbedderConfig cfg_;
  std::map<std::string, int> df_;
  size_t doc_count_ = 0;
  bool fitted_ = false;
};

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ContractError("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace elv
