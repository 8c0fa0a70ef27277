#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "elv/common.hpp"
#include "elv/corpus.hpp"
#include "elv/embed.hpp"

namespace elv {

// ---------------------------------------------------------------------------
// Explanation DSL: a conjunction of positional predicates over anchors.
// ---------------------------------------------------------------------------

enum class PredKind : uint8_t {
  WordNearAnchor = 0,   // phrase within k words before/after an anchor
  PhraseBetween = 1,    // phrase occurs between two anchors
  DistanceAtMost = 2,   // at most n words between two anchors
  Order = 3,            // one anchor precedes the other
  DirectlyAdjacent = 4  // phrase immediately before/after an anchor
};

constexpr int kNumPredKinds = 5;

inline const char* pred_kind_name(PredKind k) {
  switch (k) {
    case PredKind::WordNearAnchor: return "WordNearAnchor";
    case PredKind::PhraseBetween: return "PhraseBetween";
    case PredKind::DistanceAtMost: return "DistanceAtMost";
    case PredKind::Order: return "Order";
    case PredKind::DirectlyAdjacent: return "DirectlyAdjacent";
  }
  return "?";
}

struct Predicate {
  PredKind kind = PredKind::WordNearAnchor;
  std::vector<std::string> phrase;  // WordNearAnchor, PhraseBetween, DirectlyAdjacent
  Anchor a1 = Anchor::Term;         // the anchor (WNA/DA), or first of the pair
  Anchor a2 = Anchor::Term;         // second of the pair (PB/DistanceAtMost/Order)
  bool before = true;               // direction/side for WNA and DA
  int max_dist = kUnbounded;        // WNA cap (>=1) or DistanceAtMost bound (>=0)

  static constexpr int kUnbounded = -1;

  bool operator==(const Predicate&) const = default;

  bool has_phrase() const {
    return kind == PredKind::WordNearAnchor || kind == PredKind::PhraseBetween ||
           kind == PredKind::DirectlyAdjacent;
  }

  // Lexicographic identity used for canonical enumeration order.
  auto key() const {
    return std::make_tuple(static_cast<int>(kind), join_tokens(phrase), static_cast<int>(a1),
                           static_cast<int>(a2), before ? 0 : 1, max_dist);
  }
};

inline bool operator<(const Predicate& a, const Predicate& b) { return a.key() < b.key(); }

inline Predicate word_near(std::vector<std::string> phrase, Anchor a, bool before,
                           int max_dist = Predicate::kUnbounded) {
  if (phrase.empty()) throw ContractError("word_near: empty phrase");
  if (max_dist != Predicate::kUnbounded && max_dist < 1)
    throw ContractError("word_near: bounded distance must be >= 1");
  Predicate p;
  p.kind = PredKind::WordNearAnchor;
  p.phrase = std::move(phrase);
  p.a1 = p.a2 = a;
  p.before = before;
  p.max_dist = max_dist;
  return p;
}

inline Predicate directly_adjacent(std::vector<std::string> phrase, Anchor a, bool before) {
  if (phrase.empty()) throw ContractError("directly_adjacent: empty phrase");
  Predicate p;
  p.kind = PredKind::DirectlyAdjacent;
  p.phrase = std::move(phrase);
  p.a1 = p.a2 = a;
  p.before = before;
  p.max_dist = 0;
  return p;
}

// Symmetric in the anchors; stored in enum order.
inline Predicate phrase_between(std::vector<std::string> phrase, Anchor x, Anchor y) {
  if (phrase.empty()) throw ContractError("phrase_between: empty phrase");
  if (x == y) throw ContractError("phrase_between: identical anchors");
  Predicate p;
  p.kind = PredKind::PhraseBetween;
  p.phrase = std::move(phrase);
  p.a1 = std::min(x, y);
  p.a2 = std::max(x, y);
  return p;
}

inline Predicate distance_at_most(Anchor x, Anchor y, int n) {
  if (x == y) throw ContractError("distance_at_most: identical anchors");
  if (n < 0) throw ContractError("distance_at_most: negative bound");
  Predicate p;
  p.kind = PredKind::DistanceAtMost;
  p.a1 = std::min(x, y);
  p.a2 = std::max(x, y);
  p.max_dist = n;
  return p;
}

inline Predicate anchor_order(Anchor first, Anchor second) {
  if (first == second) throw ContractError("anchor_order: identical anchors");
  Predicate p;
  p.kind = PredKind::Order;
  p.a1 = first;
  p.a2 = second;
  return p;
}

struct ExplanationAst {
  std::vector<Predicate> predicates;  // non-empty conjunction

  bool operator==(const ExplanationAst&) const = default;
  std::string surface() const;  // canonical rendering, defined below
};

// ---------------------------------------------------------------------------
// Rendering: deterministic canonical English, parseable by parse_explanation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string anchor_surface(Anchor a) {
  switch (a) {
    case Anchor::Term: return "the term";
    case Anchor::Subj: return "subj";
    case Anchor::Obj: return "obj";
  }
  return "?";
}

inline std::string quoted_phrase(const std::vector<std::string>& phrase) {
  return "\"" + join_tokens(phrase) + "\"";
}

inline std::string phrase_intro(const std::vector<std::string>& phrase) {
  return phrase.size() == 1 ? "the word " : "the phrase ";
}

}  // namespace detail

inline std::string render_predicate(const Predicate& p) {
  using detail::anchor_surface;
  using detail::phrase_intro;
  using detail::quoted_phrase;
  switch (p.kind) {
    case PredKind::WordNearAnchor: {
      std::string s = phrase_intro(p.phrase) + quoted_phrase(p.phrase) + " occurs ";
      if (p.max_dist != Predicate::kUnbounded)
        s += "within " + std::to_string(p.max_dist) +
             (p.max_dist == 1 ? " word " : " words ");
      s += (p.before ? "before " : "after ") + anchor_surface(p.a1);
      return s;
    }
    case PredKind::DirectlyAdjacent:
      return phrase_intro(p.phrase) + quoted_phrase(p.phrase) +
             (p.before ? " directly precedes " : " directly follows ") + anchor_surface(p.a1);
    case PredKind::PhraseBetween:
      return phrase_intro(p.phrase) + quoted_phrase(p.phrase) + " occurs between " +
             anchor_surface(p.a1) + " and " + anchor_surface(p.a2);
    case PredKind::DistanceAtMost:
      return "there are no more than " + std::to_string(p.max_dist) +
             (p.max_dist == 1 ? " word" : " words") + " between " + anchor_surface(p.a1) +
             " and " + anchor_surface(p.a2);
    case PredKind::Order:
      return anchor_surface(p.a1) + " precedes " + anchor_surface(p.a2);
  }
  return "?";
}

inline std::string render_explanation(const ExplanationAst& ast) {
  if (ast.predicates.empty()) throw ContractError("render: empty AST");
  std::string out;
  for (size_t i = 0; i < ast.predicates.size(); ++i) {
    if (i) out += " and ";
    out += render_predicate(ast.predicates[i]);
  }
  return out;
}

inline std::string ExplanationAst::surface() const { return render_explanation(*this); }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

struct LexTok {
  enum Type { Word, Phrase } type = Word;
  std::string word;                  // lowercase
  std::vector<std::string> phrase;   // tokenized quoted content
};

inline std::vector<LexTok> lex_surface(const std::string& s) {
  std::vector<LexTok> out;
  size_t i = 0, n = s.size();
  auto alnum = [](unsigned char c) { return std::isalnum(c) != 0; };
  while (i < n) {
    unsigned char c = s[i];
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '"') {
      size_t j = s.find('"', i + 1);
      if (j == std::string::npos) throw DslParseError("unterminated quote in: " + s);
      auto toks = tokenize(s.substr(i + 1, j - i - 1));
      if (toks.empty()) throw DslParseError("empty quoted phrase in: " + s);
      out.push_back(LexTok{LexTok::Phrase, "", std::move(toks)});
      i = j + 1;
      continue;
    }
    if (c == '\'') {
      bool at_boundary = (i == 0) || std::isspace(static_cast<unsigned char>(s[i - 1]));
      size_t j = s.find('\'', i + 1);
      bool closes = j != std::string::npos &&
                    (j + 1 >= n || !alnum(static_cast<unsigned char>(s[j + 1])));
      if (at_boundary && closes) {
        auto toks = tokenize(s.substr(i + 1, j - i - 1));
        if (toks.empty()) throw DslParseError("empty quoted phrase in: " + s);
        out.push_back(LexTok{LexTok::Phrase, "", std::move(toks)});
        i = j + 1;
        continue;
      }
    }
    if (alnum(c)) {
      std::string w;
      while (i < n && alnum(static_cast<unsigned char>(s[i])))
        w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++]))));
      out.push_back(LexTok{LexTok::Word, std::move(w), {}});
      continue;
    }
    ++i;  // other punctuation is not meaningful in the grammar
  }
  return out;
}

inline bool word_to_number(const std::string& w, int& out) {
  static const std::array<const char*, 11> words = {"zero", "one", "two",   "three", "four", "five",
                                                    "six",  "seven", "eight", "nine",  "ten"};
  for (size_t i = 0; i < words.size(); ++i)
    if (w == words[i]) {
      out = static_cast<int>(i);
      return true;
    }
  if (!w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); })) {
    out = std::stoi(w);
    return true;
  }
  return false;
}

// Recursive-descent parser over lexed tokens. Templates are tried in a fixed
// order with backtracking; the furthest failure position feeds the error.
struct SurfaceParser {
  const std::vector<LexTok>& toks;
  TaskSchema schema;
  size_t pos = 0;
  size_t max_pos = 0;

  SurfaceParser(const std::vector<LexTok>& t, TaskSchema s) : toks(t), schema(s) {}

  bool done() const { return pos >= toks.size(); }

  void note_progress() { max_pos = std::max(max_pos, pos); }

  bool accept_word(std::string_view w) {
    if (pos < toks.size() && toks[pos].type == LexTok::Word && toks[pos].word == w) {
      ++pos;
      note_progress();
      return true;
    }
    return false;
  }

  bool accept_any(std::initializer_list<std::string_view> ws) {
    for (auto w : ws)
      if (accept_word(w)) return true;
    return false;
  }

  bool accept_phrase(std::vector<std::string>& out) {
    if (pos < toks.size() && toks[pos].type == LexTok::Phrase) {
      out = toks[pos].phrase;
      ++pos;
      note_progress();
      return true;
    }
    return false;
  }

  bool accept_number(int& out) {
    if (pos < toks.size() && toks[pos].type == LexTok::Word &&
        word_to_number(toks[pos].word, out)) {
      ++pos;
      note_progress();
      return true;
    }
    return false;
  }

  bool accept_anchor(Anchor& out) {
    size_t save = pos;
    accept_word("the");
    if (pos < toks.size() && toks[pos].type == LexTok::Word) {
      Anchor a;
      if (anchor_from_name(toks[pos].word, a) && schema_has(schema, a)) {
        out = a;
        ++pos;
        note_progress();
        return true;
      }
    }
    pos = save;
    return false;
  }

  // "there are no more than N words between A and B"
  bool clause_distance(std::vector<Predicate>& out) {
    size_t save = pos;
    int n = 0;
    Anchor a, b;
    if (accept_word("there") && accept_any({"are", "is"}) && accept_word("no") &&
        accept_word("more") && accept_word("than") && accept_number(n) &&
        accept_any({"words", "word"}) && accept_word("between") && accept_anchor(a) &&
        accept_word("and") && accept_anchor(b) && a != b) {
      out.push_back(distance_at_most(a, b, n));
      return true;
    }
    pos = save;
    return false;
  }

  // "there is only one word "P" between A and B"
  bool clause_only_word(std::vector<Predicate>& out) {
    size_t save = pos;
    std::vector<std::string> phrase;
    Anchor a, b;
    if (accept_word("there") && accept_word("is") && accept_word("only") &&
        accept_word("one") && accept_any({"word", "phrase"}) && accept_phrase(phrase) &&
        accept_word("between") && accept_anchor(a) && accept_word("and") && accept_anchor(b) &&
        a != b) {
      out.push_back(phrase_between(phrase, a, b));
      out.push_back(distance_at_most(a, b, 1));
      return true;
    }
    pos = save;
    return false;
  }

  // "A and B sandwich the phrase "P""
  bool clause_sandwich(std::vector<Predicate>& out) {
    size_t save = pos;
    Anchor a, b;
    std::vector<std::string> phrase;
    if (accept_anchor(a) && accept_word("and") && accept_anchor(b) && a != b &&
        accept_word("sandwich")) {
      accept_word("the");
      accept_any({"phrase", "word", "string", "term"});
      if (accept_phrase(phrase)) {
        out.push_back(phrase_between(phrase, a, b));
        return true;
      }
    }
    pos = save;
    return false;
  }

  // "between A and B the phrase "P" appears"
  bool clause_between_leading(std::vector<Predicate>& out) {
    size_t save = pos;
    Anchor a, b;
    std::vector<std::string> phrase;
    if (accept_word("between") && accept_anchor(a) && accept_word("and") && accept_anchor(b) &&
        a != b) {
      accept_word("the");
      accept_any({"phrase", "word", "string", "term"});
      if (accept_phrase(phrase)) {
        accept_any({"appears", "occurs"});
        out.push_back(phrase_between(phrase, a, b));
        return true;
      }
    }
    pos = save;
    return false;
  }

  // "A precedes B" / "A follows B"
  bool clause_order(std::vector<Predicate>& out) {
    size_t save = pos;
    Anchor a, b;
    if (accept_anchor(a)) {
      bool precedes = accept_word("precedes");
      bool follows = !precedes && accept_word("follows");
      if ((precedes || follows) && accept_anchor(b) && a != b) {
        out.push_back(precedes ? anchor_order(a, b) : anchor_order(b, a));
        return true;
      }
    }
    pos = save;
    return false;
  }

  // "A is followed by "P"" / "A is preceded by "P""
  bool clause_anchor_adjacency(std::vector<Predicate>& out) {
    size_t save = pos;
    Anchor a;
    std::vector<std::string> phrase;
    if (accept_anchor(a) && accept_word("is")) {
      bool followed = accept_word("followed");
      bool preceded = !followed && accept_word("preceded");
      if ((followed || preceded) && accept_word("by") && accept_phrase(phrase)) {
        out.push_back(word_near(phrase, a, preceded, Predicate::kUnbounded));
        return true;
      }
    }
    pos = save;
    return false;
  }

  // "the word "P" <tail>"
  bool clause_phrase_leading(std::vector<Predicate>& out) {
    size_t save = pos;
    std::vector<std::string> phrase;
    accept_word("the");
    if (!accept_any({"word", "phrase", "string", "term"}) || !accept_phrase(phrase)) {
      pos = save;
      return false;
    }
    accept_any({"occurs", "appears", "is", "comes"});

    // directly precedes / directly follows
    {
      size_t t = pos;
      if (accept_word("directly")) {
        bool prec = accept_word("precedes");
        bool foll = !prec && accept_word("follows");
        Anchor a;
        if ((prec || foll) && accept_anchor(a)) {
          out.push_back(directly_adjacent(phrase, a, prec));
          return true;
        }
      }
      pos = t;
    }
    // right before / right after
    {
      size_t t = pos;
      if (accept_word("right")) {
        bool before = accept_word("before");
        bool after = !before && accept_word("after");
        Anchor a;
        if ((before || after) && accept_anchor(a)) {
          out.push_back(directly_adjacent(phrase, a, before));
          return true;
        }
      }
      pos = t;
    }
    // within N words before/after
    {
      size_t t = pos;
      int n = 0;
      if (accept_word("within") && accept_number(n) && accept_any({"words", "word"})) {
        bool before = accept_word("before");
        bool after = !before && accept_word("after");
        Anchor a;
        if ((before || after) && accept_anchor(a)) {
          if (n < 1) throw DslParseError("distance bound must be >= 1 in: within " +
                                         std::to_string(n) + " words");
          out.push_back(word_near(phrase, a, before, n));
          return true;
        }
      }
      pos = t;
    }
    // no more than N words before/after
    {
      size_t t = pos;
      int n = 0;
      if (accept_word("no") && accept_word("more") && accept_word("than") && accept_number(n) &&
          accept_any({"words", "word"})) {
        bool before = accept_word("before");
        bool after = !before && accept_word("after");
        Anchor a;
        if ((before || after) && accept_anchor(a)) {
          if (n < 1) throw DslParseError("distance bound must be >= 1");
          out.push_back(word_near(phrase, a, before, n));
          return true;
        }
      }
      pos = t;
    }
    // between A and B
    {
      size_t t = pos;
      Anchor a, b;
      if (accept_word("between") && accept_anchor(a) && accept_word("and") && accept_anchor(b) &&
          a != b) {
        out.push_back(phrase_between(phrase, a, b));
        return true;
      }
      pos = t;
    }
    // links A and B
    {
      size_t t = pos;
      Anchor a, b;
      if (accept_word("links") && accept_anchor(a) && accept_word("and") && accept_anchor(b) &&
          a != b) {
        out.push_back(phrase_between(phrase, a, b));
        return true;
      }
      pos = t;
    }
    // before/after ANCHOR [by no more than N words]
    {
      size_t t = pos;
      bool before = accept_word("before");
      bool after = !before && accept_word("after");
      Anchor a;
      if ((before || after) && accept_anchor(a)) {
        size_t u = pos;
        int n = 0;
        if (accept_word("by") && accept_word("no") && accept_word("more") &&
            accept_word("than") && accept_number(n) && accept_any({"words", "word"})) {
          if (n < 1) throw DslParseError("distance bound must be >= 1");
          out.push_back(word_near(phrase, a, before, n));
          return true;
        }
        pos = u;
        out.push_back(word_near(phrase, a, before, Predicate::kUnbounded));
        return true;
      }
      pos = t;
    }
    pos = save;
    return false;
  }

  bool clause(std::vector<Predicate>& out) {
    return clause_distance(out) || clause_only_word(out) || clause_sandwich(out) ||
           clause_between_leading(out) || clause_order(out) || clause_anchor_adjacency(out) ||
           clause_phrase_leading(out);
  }

  std::string fragment_from(size_t at) const {
    std::string frag;
    for (size_t i = at; i < toks.size(); ++i) {
      if (!frag.empty()) frag += ' ';
      frag += toks[i].type == LexTok::Word ? toks[i].word : quoted_phrase(toks[i].phrase);
    }
    return frag.empty() ? "<end of input>" : frag;
  }
};

}  // namespace detail

inline ExplanationAst parse_explanation(const std::string& surface, TaskSchema schema,
                                        int max_conjuncts = 3) {
  auto toks = detail::lex_surface(surface);
  if (toks.empty()) throw DslParseError("empty explanation");
  detail::SurfaceParser p(toks, schema);
  ExplanationAst ast;
  for (;;) {
    if (!p.clause(ast.predicates))
      throw DslParseError("unrecognized template at: \"" + p.fragment_from(p.max_pos) +
                          "\" in: " + surface);
    if (p.done()) break;
    if (!p.accept_word("and"))
      throw DslParseError("expected 'and' at: \"" + p.fragment_from(p.pos) +
                          "\" in: " + surface);
  }
  if (static_cast<int>(ast.predicates.size()) > max_conjuncts)
    throw DslParseError("too many conjuncts (" + std::to_string(ast.predicates.size()) +
                        " > " + std::to_string(max_conjuncts) + ") in: " + surface);
  return ast;
}

namespace detail {
// Installs DSL validation into the corpus loader when this header is in use.
inline const bool kValidatorInstalled = [] {
  explanation_validator() = +[](const std::string& s, TaskSchema schema) {
    (void)parse_explanation(s, schema);
  };
  return true;
}();
}  // namespace detail

// ---------------------------------------------------------------------------
// Matching.
// Distances count the tokens strictly between the nearest edges of the phrase
// occurrence and the anchor span (both exclusive).
// ---------------------------------------------------------------------------

struct MatchParams {
  double tau = 2.0;  // decay scale for distance overshoot
};

// Non-exact n-gram similarity is capped strictly below 1 so that a perfect
// soft score always implies a hard match (hash collisions would otherwise
// allow cosine == 1 for distinct phrases).
constexpr double kNonExactSimCap = 1.0 - 1e-6;

namespace detail {

inline std::vector<int> occurrences(const std::vector<std::string>& tokens,
                                    const std::vector<std::string>& phrase) {
  std::vector<int> out;
  if (phrase.empty() || phrase.size() > tokens.size()) return out;
  for (size_t s = 0; s + phrase.size() <= tokens.size(); ++s) {
    bool ok = true;
    for (size_t k = 0; k < phrase.size(); ++k)
      if (tokens[s + k] != phrase[k]) {
        ok = false;
        break;
      }
    if (ok) out.push_back(static_cast<int>(s));
  }
  return out;
}

// Region strictly between two spans, empty when they touch or overlap.
inline std::pair<int, int> between_region(const Span& x, const Span& y) {
  const Span& lo = x.start <= y.start ? x : y;
  const Span& hi = x.start <= y.start ? y : x;
  return {lo.end, hi.start};
}

inline int anchor_gap(const Span& x, const Span& y) {
  auto [b, e] = between_region(x, y);
  return std::max(0, e - b);
}

}  // namespace detail

inline bool hard_match_predicate(const Predicate& p, const Instance& x) {
  const auto& T = x.tokens;
  switch (p.kind) {
    case PredKind::WordNearAnchor: {
      const Span& a = x.anchor(p.a1);
      for (int s : detail::occurrences(T, p.phrase)) {
        int e = s + static_cast<int>(p.phrase.size());
        if (p.before) {
          if (e <= a.start && (p.max_dist == Predicate::kUnbounded || a.start - e <= p.max_dist))
            return true;
        } else {
          if (s >= a.end && (p.max_dist == Predicate::kUnbounded || s - a.end <= p.max_dist))
            return true;
        }
      }
      return false;
    }
    case PredKind::DirectlyAdjacent: {
      const Span& a = x.anchor(p.a1);
      for (int s : detail::occurrences(T, p.phrase)) {
        int e = s + static_cast<int>(p.phrase.size());
        if (p.before ? e == a.start : s == a.end) return true;
      }
      return false;
    }
    case PredKind::PhraseBetween: {
      auto [b, e] = detail::between_region(x.anchor(p.a1), x.anchor(p.a2));
      for (int s : detail::occurrences(T, p.phrase))
        if (s >= b && s + static_cast<int>(p.phrase.size()) <= e) return true;
      return false;
    }
    case PredKind::DistanceAtMost:
      return detail::anchor_gap(x.anchor(p.a1), x.anchor(p.a2)) <= p.max_dist;
    case PredKind::Order:
      return x.anchor(p.a1).end <= x.anchor(p.a2).start;
  }
  return false;
}

inline bool hard_match(const ExplanationAst& ast, const Instance& x) {
  if (ast.predicates.empty()) throw ContractError("hard_match: empty AST");
  for (const auto& p : ast.predicates)
    if (!hard_match_predicate(p, x)) return false;
  return true;
}

namespace detail {

inline double phrase_similarity(const std::vector<std::string>& phrase,
                                const std::vector<std::string>& window,
                                const std::vector<double>& phrase_vec,
                                const SentenceEmbedder& emb) {
  if (phrase == window) return 1.0;
  double c = cosine(phrase_vec, emb.embed(join_tokens(window)));
  return std::min(std::max(c, 0.0), kNonExactSimCap);
}

inline double overshoot_decay(int gap, int cap, double tau) {
  if (cap == Predicate::kUnbounded || gap <= cap) return 1.0;
  return std::exp(-static_cast<double>(gap - cap) / tau);
}

}  // namespace detail

// Score in [0,1] for one conjunct; exactly 1.0 iff the conjunct hard-matches.
inline double soft_match_predicate(const Predicate& p, const Instance& x,
                                   const SentenceEmbedder& emb, const MatchParams& mp = {}) {
  const auto& T = x.tokens;
  const int n = static_cast<int>(T.size());
  switch (p.kind) {
    case PredKind::WordNearAnchor:
    case PredKind::DirectlyAdjacent: {
      const Span& a = x.anchor(p.a1);
      const int len = static_cast<int>(p.phrase.size());
      const int cap = p.kind == PredKind::DirectlyAdjacent ? 0 : p.max_dist;
      if (len > n) return 0.0;
      std::vector<double> pv = emb.embed(join_tokens(p.phrase));
      double best = 0.0;
      for (int s = 0; s + len <= n; ++s) {
        int gap;
        if (p.before) {
          if (s + len > a.start) continue;
          gap = a.start - (s + len);
        } else {
          if (s < a.end) continue;
          gap = s - a.end;
        }
        std::vector<std::string> window(T.begin() + s, T.begin() + s + len);
        double sim = detail::phrase_similarity(p.phrase, window, pv, emb);
        best = std::max(best, sim * detail::overshoot_decay(gap, cap, mp.tau));
        if (best == 1.0) break;
      }
      return best;
    }
    case PredKind::PhraseBetween: {
      auto [b, e] = detail::between_region(x.anchor(p.a1), x.anchor(p.a2));
      const int len = static_cast<int>(p.phrase.size());
      if (e - b < len) return 0.0;
      std::vector<double> pv = emb.embed(join_tokens(p.phrase));
      double best = 0.0;
      for (int s = b; s + len <= e; ++s) {
        std::vector<std::string> window(T.begin() + s, T.begin() + s + len);
        best = std::max(best, detail::phrase_similarity(p.phrase, window, pv, emb));
        if (best == 1.0) break;
      }
      return best;
    }
    case PredKind::DistanceAtMost: {
      int gap = detail::anchor_gap(x.anchor(p.a1), x.anchor(p.a2));
      return detail::overshoot_decay(gap, p.max_dist, mp.tau);
    }
    case PredKind::Order:
      return hard_match_predicate(p, x) ? 1.0 : 0.0;
  }
  return 0.0;
}

inline std::vector<double> soft_match_parts(const ExplanationAst& ast, const Instance& x,
                                            const SentenceEmbedder& emb,
                                            const MatchParams& mp = {}) {
  std::vector<double> out;
  out.reserve(ast.predicates.size());
  for (const auto& p : ast.predicates) out.push_back(soft_match_predicate(p, x, emb, mp));
  return out;
}

inline double soft_match(const ExplanationAst& ast, const Instance& x,
                         const SentenceEmbedder& emb, const MatchParams& mp = {}) {
  if (ast.predicates.empty()) throw ContractError("soft_match: empty AST");
  double s = 1.0;
  for (const auto& p : ast.predicates) s *= soft_match_predicate(p, x, emb, mp);
  return s;
}

// ---------------------------------------------------------------------------
// Candidate enumeration
// ---------------------------------------------------------------------------

struct EnumConfig {
  int max_dist = 6;
  int max_candidates = 2000;
  int max_conjuncts = 3;
  std::array<bool, kNumPredKinds> enabled = {true, true, true, true, true};

  bool kind_enabled(PredKind k) const { return enabled[static_cast<size_t>(k)]; }
};

inline const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "the",  "and",  "or",   "but",  "if",    "then", "than", "that",
      "this", "these","those","is",   "are",  "was",  "were",  "be",   "been", "being",
      "am",   "do",   "does", "did",  "have", "has",  "had",   "i",    "you",  "he",
      "she",  "it",   "we",   "they", "of",   "in",   "on",    "at",   "to",   "for",
      "with", "from", "by",   "as",   "not",  "no",   "so",    "its",  "my",   "your"};
  return words;
}

namespace detail {

// Candidate phrases: uni/bigrams of x that do not overlap an anchor span and
// are not made of stopwords only. Sorted, deduplicated.
inline std::vector<std::vector<std::string>> candidate_phrases(const Instance& x) {
  const auto& T = x.tokens;
  auto overlaps_anchor = [&](int s, int e) {
    for (const auto& [a, sp] : x.anchors)
      if (s < sp.end && e > sp.start) return true;
    return false;
  };
  std::set<std::vector<std::string>> uniq;
  for (int len = 1; len <= 2; ++len) {
    for (int s = 0; s + len <= static_cast<int>(T.size()); ++s) {
      if (overlaps_anchor(s, s + len)) continue;
      bool all_stop = true;
      for (int k = 0; k < len; ++k)
        if (!stopwords().count(T[s + k])) {
          all_stop = false;
          break;
        }
      if (all_stop) continue;
      uniq.insert(std::vector<std::string>(T.begin() + s, T.begin() + s + len));
    }
  }
  return {uniq.begin(), uniq.end()};
}

struct CandKey {
  int phrase_tokens = 0;
  int total_dist = 0;
  int conjuncts = 0;
};

inline int pred_phrase_tokens(const Predicate& p) { return static_cast<int>(p.phrase.size()); }

inline int pred_dist(const Predicate& p) {
  return p.max_dist == Predicate::kUnbounded ? 0 : p.max_dist;
}

}  // namespace detail

// All single- and two-conjunct ASTs with phrases drawn from x, in a fixed
// priority order (fewest phrase tokens, then smallest total distance, then
// lexicographic by predicate identity), truncated to caps.max_candidates.
inline std::vector<ExplanationAst> enumerate_candidates(const Instance& x,
                                                        const EnumConfig& caps = {}) {
  std::vector<Predicate> singles;
  const auto phrases = detail::candidate_phrases(x);
  const bool pair_schema = x.anchors.count(Anchor::Subj) && x.anchors.count(Anchor::Obj);
  std::vector<Anchor> anchors;
  for (const auto& [a, sp] : x.anchors) anchors.push_back(a);

  if (caps.kind_enabled(PredKind::WordNearAnchor))
    for (const auto& ph : phrases)
      for (Anchor a : anchors)
        for (bool before : {true, false})
          for (int k = 1; k <= caps.max_dist; ++k) singles.push_back(word_near(ph, a, before, k));
  if (caps.kind_enabled(PredKind::DirectlyAdjacent))
    for (const auto& ph : phrases)
      for (Anchor a : anchors)
        for (bool before : {true, false}) singles.push_back(directly_adjacent(ph, a, before));
  if (pair_schema) {
    if (caps.kind_enabled(PredKind::PhraseBetween))
      for (const auto& ph : phrases) singles.push_back(phrase_between(ph, Anchor::Subj, Anchor::Obj));
    if (caps.kind_enabled(PredKind::DistanceAtMost))
      for (int n = 0; n <= caps.max_dist; ++n)
        singles.push_back(distance_at_most(Anchor::Subj, Anchor::Obj, n));
    if (caps.kind_enabled(PredKind::Order)) {
      singles.push_back(anchor_order(Anchor::Subj, Anchor::Obj));
      singles.push_back(anchor_order(Anchor::Obj, Anchor::Subj));
    }
  }

  std::sort(singles.begin(), singles.end());

  struct Entry {
    detail::CandKey key;
    int i = -1, j = -1;  // single when j < 0
  };
  std::vector<Entry> entries;
  const int ns = static_cast<int>(singles.size());
  entries.reserve(static_cast<size_t>(ns) + (caps.max_conjuncts >= 2 ? static_cast<size_t>(ns) * 4 : 0));
  std::vector<int> ptoks(ns), pdist(ns);
  for (int i = 0; i < ns; ++i) {
    ptoks[i] = detail::pred_phrase_tokens(singles[i]);
    pdist[i] = detail::pred_dist(singles[i]);
    entries.push_back({{ptoks[i], pdist[i], 1}, i, -1});
  }
  if (caps.max_conjuncts >= 2)
    for (int i = 0; i < ns; ++i)
      for (int j = i + 1; j < ns; ++j)
        entries.push_back({{ptoks[i] + ptoks[j], pdist[i] + pdist[j], 2}, i, j});

  auto less = [&](const Entry& a, const Entry& b) {
    if (a.key.phrase_tokens != b.key.phrase_tokens)
      return a.key.phrase_tokens < b.key.phrase_tokens;
    if (a.key.total_dist != b.key.total_dist) return a.key.total_dist < b.key.total_dist;
    if (a.key.conjuncts != b.key.conjuncts) return a.key.conjuncts < b.key.conjuncts;
    auto ka = std::make_pair(a.i, a.j < 0 ? -1 : a.j);
    auto kb = std::make_pair(b.i, b.j < 0 ? -1 : b.j);
    return ka < kb;  // singles are already in predicate-key order
  };
  const size_t want = static_cast<size_t>(std::max(0, caps.max_candidates));
  if (entries.size() > want) {
    std::nth_element(entries.begin(), entries.begin() + static_cast<long>(want), entries.end(), less);
    entries.resize(want);
  }
  std::sort(entries.begin(), entries.end(), less);

  std::vector<ExplanationAst> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    ExplanationAst ast;
    ast.predicates.push_back(singles[e.i]);
    if (e.j >= 0) ast.predicates.push_back(singles[e.j]);
    out.push_back(std::move(ast));
  }
  return out;
}

}  // namespace elv
