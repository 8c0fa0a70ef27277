#pragma once

// Shared helpers for the test suites: fixture builders and small random
// generators (hand-rolled property-test style).

#include <random>
#include <string>
#include <vector>

#include "elv/corpus.hpp"
#include "elv/dsl.hpp"
#include "elv/embed.hpp"

namespace elvtest {

using namespace elv;

inline Instance make_instance(std::string id, std::string text,
                              std::map<Anchor, Span> anchors,
                              std::optional<std::string> label = std::nullopt) {
  Instance x;
  x.id = std::move(id);
  x.text = std::move(text);
  x.tokens = tokenize(x.text);
  x.anchors = std::move(anchors);
  x.label = std::move(label);
  return x;
}

inline std::vector<std::string> small_vocab() {
  return {"alpha", "bravo", "charlie", "delta", "echo",  "foxtrot", "golf",
          "hotel", "india", "juliet",  "kilo",  "lima",  "mike",    "november"};
}

// Random instance with the requested schema; anchors never overlap.
inline Instance random_instance(Rng& rng, TaskSchema schema, int min_len = 6, int max_len = 14) {
  auto vocab = small_vocab();
  std::uniform_int_distribution<int> len_d(min_len, max_len);
  std::uniform_int_distribution<size_t> word_d(0, vocab.size() - 1);
  int len = len_d(rng);
  std::vector<std::string> toks;
  for (int i = 0; i < len; ++i) toks.push_back(vocab[word_d(rng)]);

  std::map<Anchor, Span> anchors;
  if (schema == TaskSchema::Term) {
    std::uniform_int_distribution<int> pos_d(0, len - 1);
    int p = pos_d(rng);
    anchors[Anchor::Term] = Span{p, p + 1};
  } else {
    std::uniform_int_distribution<int> pos_d(0, len - 2);
    int a = pos_d(rng);
    int b = pos_d(rng);
    while (b == a) b = pos_d(rng);
    int lo = std::min(a, b), hi = std::max(a, b);
    anchors[Anchor::Subj] = Span{lo, lo + 1};
    anchors[Anchor::Obj] = Span{hi, hi + 1};
  }
  static int counter = 0;
  Instance x = make_instance("rnd" + std::to_string(counter++), join_tokens(toks), anchors);
  return x;
}

inline SentenceEmbedder fitted_embedder(int dim = 128) {
  SentenceEmbedder emb(EmbedderConfig{dim});
  std::vector<std::string> corpus;
  for (const auto& w : small_vocab()) corpus.push_back(w);
  corpus.push_back("the food is wonderful");
  corpus.push_back("the service is wonderful");
  corpus.push_back("delivery took forever");
  emb.fit(corpus);
  return emb;
}

}  // namespace elvtest
