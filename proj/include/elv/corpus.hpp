#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elv/common.hpp"

namespace elv {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Tokenizer: lowercase, split on whitespace, punctuation as separate tokens.
// An apostrophe immediately followed by a letter starts a clitic token
// ("burke's" -> "burke" "'s"), so pre-split clitics survive re-tokenization.
// ---------------------------------------------------------------------------

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0, n = text.size();
  auto is_word = [](unsigned char c) { return std::isalnum(c) != 0; };
  while (i < n) {
    unsigned char c = text[i];
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::string tok;
    if (is_word(c)) {
      while (i < n && is_word(static_cast<unsigned char>(text[i])))
        tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++]))));
    } else if (c == '\'' && i + 1 < n && std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
      tok.push_back('\'');
      ++i;
      while (i < n && is_word(static_cast<unsigned char>(text[i])))
        tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++]))));
    } else {
      tok.push_back(static_cast<char>(std::tolower(c)));
      ++i;
    }
    out.push_back(std::move(tok));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instance
// ---------------------------------------------------------------------------

struct Span {
  int start = 0;
  int end = 0;  // exclusive
  bool operator==(const Span&) const = default;
};

struct Instance {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;  // derived from text
  std::map<Anchor, Span> anchors;
  std::optional<std::string> label;
  std::optional<std::string> explanation_surface;

  bool operator==(const Instance&) const = default;

  const Span& anchor(Anchor a) const {
    auto it = anchors.find(a);
    if (it == anchors.end())
      throw ContractError(std::string("instance ") + id + " has no anchor " + anchor_name(a));
    return it->second;
  }
};

inline void validate_instance(const Instance& inst, TaskSchema schema) {
  const auto want = schema_anchors(schema);
  if (inst.anchors.size() != want.size())
    throw DataError("instance " + inst.id + ": anchor set does not match schema " +
                    schema_name(schema));
  for (Anchor a : want) {
    auto it = inst.anchors.find(a);
    if (it == inst.anchors.end())
      throw DataError("instance " + inst.id + ": missing anchor " + anchor_name(a));
    const Span& s = it->second;
    if (!(0 <= s.start && s.start < s.end && s.end <= static_cast<int>(inst.tokens.size())))
      throw DataError("instance " + inst.id + ": anchor " + anchor_name(a) +
                      " span out of range");
  }
}

// ---------------------------------------------------------------------------
// Label space: fixed ordering, index == class index
// ---------------------------------------------------------------------------

struct LabelSpace {
  std::vector<std::string> labels;

  LabelSpace() = default;
  explicit LabelSpace(std::vector<std::string> ls) : labels(std::move(ls)) {
    if (labels.empty()) throw DataError("label space is empty");
    std::set<std::string> seen;
    for (const auto& l : labels)
      if (!seen.insert(l).second) throw DataError("duplicate label: " + l);
  }

  size_t size() const { return labels.size(); }

  int index_of(const std::string& l) const {
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == l) return static_cast<int>(i);
    throw DataError("unknown label: " + l);
  }

  bool contains(const std::string& l) const {
    return std::find(labels.begin(), labels.end(), l) != labels.end();
  }

  bool operator==(const LabelSpace&) const = default;
};

// ---------------------------------------------------------------------------
// Dataset partitions
// ---------------------------------------------------------------------------

struct DatasetPartitions {
  std::vector<Instance> d_e;  // label + explanation
  std::vector<Instance> d_l;  // label only
  std::vector<Instance> d_u;  // neither
  LabelSpace label_space;
  TaskSchema schema = TaskSchema::Term;

  bool operator==(const DatasetPartitions&) const = default;

  size_t total() const { return d_e.size() + d_l.size() + d_u.size(); }
};

// ---------------------------------------------------------------------------
// JSONL parsing
// One object per line:
//   {"id": str, "text": str, "anchors": {NAME: [start,end)}, "label"?: str,
//    "explanation"?: str}
// Anchor spans are token indices under tokenize().
// ---------------------------------------------------------------------------

inline Instance instance_from_json(const json& j) {
  static const std::set<std::string> known = {"id", "text", "anchors", "label", "explanation"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw DataError("unknown field: " + it.key());

  Instance inst;
  inst.id = j.at("id").get<std::string>();
  inst.text = j.at("text").get<std::string>();
  inst.tokens = tokenize(inst.text);
  for (auto it = j.at("anchors").begin(); it != j.at("anchors").end(); ++it) {
    Anchor a;
    if (!anchor_from_name(it.key(), a))
      throw DataError("instance " + inst.id + ": unknown anchor name " + it.key());
    const auto& arr = it.value();
    if (!arr.is_array() || arr.size() != 2)
      throw DataError("instance " + inst.id + ": anchor span must be [start,end]");
    inst.anchors[a] = Span{arr[0].get<int>(), arr[1].get<int>()};
  }
  if (j.contains("label")) inst.label = j.at("label").get<std::string>();
  if (j.contains("explanation"))
    inst.explanation_surface = j.at("explanation").get<std::string>();
  return inst;
}

inline json instance_to_json(const Instance& inst) {
  json j;
  j["id"] = inst.id;
  j["text"] = inst.text;
  json anch = json::object();
  for (const auto& [a, s] : inst.anchors) anch[anchor_name(a)] = json::array({s.start, s.end});
  j["anchors"] = anch;
  if (inst.label) j["label"] = *inst.label;
  if (inst.explanation_surface) j["explanation"] = *inst.explanation_surface;
  return j;
}

// Parsing hook: the corpus loader validates d_e explanations against the DSL
// grammar without depending on the dsl header. dsl.hpp registers the real
// validator; loading data with explanations before that is a programming error
// caught here.
using ExplanationValidator = void (*)(const std::string& surface, TaskSchema schema);

inline ExplanationValidator& explanation_validator() {
  static ExplanationValidator v = nullptr;
  return v;
}

struct LoadOptions {
  std::optional<std::vector<std::string>> labels;  // explicit label order
  bool validate_explanations = true;
};

inline DatasetPartitions load_dataset_stream(std::istream& in, TaskSchema schema,
                                             const LoadOptions& opt = {}) {
  DatasetPartitions parts;
  parts.schema = schema;
  std::set<std::string> ids;
  std::set<std::string> label_values;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    Instance inst;
    try {
      inst = instance_from_json(j);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
    validate_instance(inst, schema);
    if (!ids.insert(inst.id).second)
      throw DataError("line " + std::to_string(lineno) + ": duplicate id " + inst.id);

    if (inst.explanation_surface && !inst.label)
      throw DataError("instance " + inst.id + ": explanation without label");
    if (inst.label) {
      if (opt.labels) {
        if (std::find(opt.labels->begin(), opt.labels->end(), *inst.label) == opt.labels->end())
          throw DataError("instance " + inst.id + ": unknown label " + *inst.label);
      }
      label_values.insert(*inst.label);
    }
    if (inst.explanation_surface) {
      if (opt.validate_explanations) {
        if (!explanation_validator())
          throw ContractError("no explanation validator registered");
        try {
          explanation_validator()(*inst.explanation_surface, schema);
        } catch (const DslParseError& e) {
          throw DslParseError("instance " + inst.id + ": " + e.what());
        }
      }
      parts.d_e.push_back(std::move(inst));
    } else if (inst.label) {
      parts.d_l.push_back(std::move(inst));
    } else {
      parts.d_u.push_back(std::move(inst));
    }
  }
  if (opt.labels) {
    parts.label_space = LabelSpace(*opt.labels);
  } else {
    if (label_values.empty()) throw DataError("dataset contains no labeled instances");
    parts.label_space =
        LabelSpace(std::vector<std::string>(label_values.begin(), label_values.end()));
  }
  return parts;
}

inline DatasetPartitions load_dataset(const std::string& path, TaskSchema schema,
                                      const LoadOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return load_dataset_stream(in, schema, opt);
}

inline void dump_dataset_stream(const DatasetPartitions& parts, std::ostream& out) {
  for (const auto* vec : {&parts.d_e, &parts.d_l, &parts.d_u})
    for (const Instance& inst : *vec) out << instance_to_json(inst).dump() << '\n';
}

inline void dump_dataset(const DatasetPartitions& parts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  dump_dataset_stream(parts, out);
}

// Infers the task schema from the first instance of a JSONL file.
inline TaskSchema sniff_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("line 1: malformed JSON: " + std::string(e.what()));
    }
    if (!j.contains("anchors")) throw DataError("first line has no anchors");
    bool has_term = j["anchors"].contains("TERM");
    return has_term ? TaskSchema::Term : TaskSchema::SubjObj;
  }
  throw DataError("empty dataset: " + path);
}

}  // namespace elv
