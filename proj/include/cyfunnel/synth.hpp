#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyfunnel/lexer.hpp"
#include "cyfunnel/micrograph.hpp"
#include "cyfunnel/naive_check.hpp"
#include "cyfunnel/parser.hpp"
#include "cyfunnel/schema.hpp"
#include "cyfunnel/trace.hpp"

namespace cyfunnel {

// ---------------------------------------------------------------------------
// Portable seeded RNG (splitmix64 core). Keeps generated datasets byte-stable
// across standard library implementations, which std::normal_distribution
// does not guarantee.
// ---------------------------------------------------------------------------

class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // standard normal via Box-Muller
  double next_normal() {
    if (cached_) {
      cached_ = false;
      return cache_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    cache_ = r * std::sin(theta);
    cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  bool cached_ = false;
  double cache_ = 0.0;
};

// Sub-seed derivation: mix the run seed with a stream tag so every question
// (and every purpose within a question) gets an independent stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  SplitMix mix(seed ^ (tag * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
  return mix.next_u64();
}

// ---------------------------------------------------------------------------
// Mutations
// ---------------------------------------------------------------------------

enum class MutationKind {
  DropBracket,
  DuplicateClauseKeyword,
  TruncateTail,
  FlipDirection,
  LabelSwap,
  Identity
};

inline const char* to_string(MutationKind k) {
  switch (k) {
    case MutationKind::DropBracket: return "drop_bracket";
    case MutationKind::DuplicateClauseKeyword: return "duplicate_clause_keyword";
    case MutationKind::TruncateTail: return "truncate_tail";
    case MutationKind::FlipDirection: return "flip_direction";
    case MutationKind::LabelSwap: return "label_swap";
    case MutationKind::Identity: return "identity";
  }
  return "?";
}

struct MutationResult {
  std::string text;
  MutationKind requested = MutationKind::Identity;
  MutationKind applied = MutationKind::Identity;

  bool fell_back() const { return requested != applied; }
};

namespace detail {

// Byte spans of directed relationship arrows in the token stream, with what
// a flip needs: for `-...->` drop the '>' and prepend '<'; mirrored for `<-`.
struct ArrowSite {
  bool right = true;
  std::size_t head_offset = 0;  // byte of '<' or '>'
  std::size_t dash_offset = 0;  // byte of the dash that gains the new head
};

inline std::vector<ArrowSite> find_arrow_sites(const std::vector<CypherToken>& toks) {
  std::vector<ArrowSite> sites;
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    auto sym = [&](std::size_t k, const char* s) {
      return k < toks.size() && toks[k].kind == TokenKind::Symbol && toks[k].text == s;
    };
    // right arrow: '-' then '>' (detail brackets sit before the final dash)
    if (sym(i, "-") && sym(i + 1, ">")) {
      // locate the matching start dash: either i (anonymous `-->`-style tail)
      // or the dash before the '[' that opens this detail
      std::size_t start_dash = i;
      if (i >= 1 && sym(i - 1, "]")) {
        int depth = 1;
        std::size_t k = i - 1;
        while (k > 0 && depth > 0) {
          --k;
          if (sym(k, "]")) ++depth;
          if (sym(k, "[")) --depth;
        }
        if (depth == 0 && k >= 1 && sym(k - 1, "-")) start_dash = k - 1;
      } else if (i >= 1 && sym(i - 1, "-")) {
        start_dash = i - 1;
      }
      sites.push_back({true, toks[i + 1].pos.offset, toks[start_dash].pos.offset});
    }
    // left arrow: '<' then '-'
    if (sym(i, "<") && sym(i + 1, "-")) {
      // find the closing dash of this relationship
      std::size_t k = i + 2;
      if (sym(k, "[")) {
        int depth = 1;
        ++k;
        while (k < toks.size() && depth > 0) {
          if (sym(k, "[")) ++depth;
          if (sym(k, "]")) --depth;
          ++k;
        }
      }
      if (sym(k, "-")) sites.push_back({false, toks[i].pos.offset, toks[k].pos.offset});
    }
  }
  return sites;
}

inline std::string apply_flip(const std::string& text, const ArrowSite& site) {
  std::string out = text;
  if (site.right) {
    // remove '>' and insert '<' before the opening dash
    out.erase(site.head_offset, 1);
    out.insert(site.dash_offset, "<");
  } else {
    // remove '<' and insert '>' after the closing dash
    out.insert(site.dash_offset + 1, ">");
    out.erase(site.head_offset, 1);
  }
  return out;
}

// Whether the relationship whose last dash is at index `i` carries a left head.
inline bool is_rel_directed_backward(const std::vector<CypherToken>& toks,
                                     std::size_t i) {
  std::size_t k = i;
  if (k >= 1 && toks[k - 1].kind == TokenKind::Symbol && toks[k - 1].text == "]") {
    int depth = 1;
    k = k - 1;
    while (k > 0 && depth > 0) {
      --k;
      if (toks[k].kind == TokenKind::Symbol && toks[k].text == "]") ++depth;
      if (toks[k].kind == TokenKind::Symbol && toks[k].text == "[") --depth;
    }
    if (depth != 0 || k == 0) return false;
    --k;  // the opening dash
  } else if (k >= 1) {
    --k;
  } else {
    return false;
  }
  return k >= 1 && toks[k - 1].kind == TokenKind::Symbol && toks[k - 1].text == "<";
}

// Whether the relationship starting with the dash (or '<') at index `i`
// carries a right head.
inline bool is_rel_directed_forward(const std::vector<CypherToken>& toks,
                                    std::size_t i) {
  std::size_t k = i;
  if (toks[k].kind == TokenKind::Symbol && toks[k].text == "<") return true;
  ++k;  // past the first dash
  if (k < toks.size() && toks[k].kind == TokenKind::Symbol && toks[k].text == "[") {
    int depth = 1;
    ++k;
    while (k < toks.size() && depth > 0) {
      if (toks[k].kind == TokenKind::Symbol && toks[k].text == "[") ++depth;
      if (toks[k].kind == TokenKind::Symbol && toks[k].text == "]") --depth;
      ++k;
    }
  }
  if (k < toks.size() && toks[k].kind == TokenKind::Symbol && toks[k].text == "-") ++k;
  return k < toks.size() && toks[k].kind == TokenKind::Symbol && toks[k].text == ">";
}

// Labeled node spans not attached to any directed relationship, eligible for
// a schema-neutral label swap. Returns (label token index) choices.
inline std::vector<std::size_t> safe_label_tokens(const std::vector<CypherToken>& toks) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::Symbol || toks[i].text != "(") continue;
    // node shape: '(' [var] (':' name)+ ... ')'
    std::size_t j = i + 1;
    if (j < toks.size() && toks[j].kind == TokenKind::Identifier) ++j;
    std::vector<std::size_t> labels;
    while (j + 1 < toks.size() && toks[j].kind == TokenKind::Symbol &&
           toks[j].text == ":" && toks[j + 1].kind == TokenKind::Identifier) {
      labels.push_back(j + 1);
      j += 2;
    }
    if (labels.empty()) continue;
    // close paren (skip a property map if present)
    if (j < toks.size() && toks[j].kind == TokenKind::Symbol && toks[j].text == "{") {
      int depth = 1;
      ++j;
      while (j < toks.size() && depth > 0) {
        if (toks[j].text == "{") ++depth;
        if (toks[j].text == "}") --depth;
        ++j;
      }
    }
    if (j >= toks.size() || toks[j].kind != TokenKind::Symbol || toks[j].text != ")")
      continue;
    // directed adjacency: '>' just before '(' or '<' right after ')'
    bool directed_adjacent = false;
    if (i >= 1 && toks[i - 1].kind == TokenKind::Symbol &&
        (toks[i - 1].text == ">" || toks[i - 1].text == "-"))
      directed_adjacent = toks[i - 1].text == ">" ||
                          is_rel_directed_backward(toks, i - 1);
    if (j + 1 < toks.size() && toks[j + 1].kind == TokenKind::Symbol &&
        (toks[j + 1].text == "-" || toks[j + 1].text == "<"))
      directed_adjacent = directed_adjacent || toks[j + 1].text == "<" ||
                          is_rel_directed_forward(toks, j + 1);
    if (!directed_adjacent)
      for (auto l : labels) out.push_back(l);
  }
  return out;
}

}  // namespace detail

// Applies exactly one mutation. Kinds that do not apply to this query (no
// brackets, no directed relationship, no safely swappable label) fall back to
// truncate_tail; the result records both the requested and the applied kind.
inline MutationResult mutate(const std::string& gold, MutationKind kind, SplitMix& rng,
                             const std::vector<std::string>& schema_labels = {});

namespace detail {

inline std::string truncate_invalid(const std::string& gold, SplitMix& rng) {
  // pick a random cut, then walk it down until the prefix fails the grammar
  std::size_t len = gold.size();
  std::size_t cut = 1 + rng.next_below(len > 1 ? len - 1 : 1);
  for (std::size_t c = cut; c >= 1; --c) {
    std::string prefix = gold.substr(0, c);
    while (!prefix.empty() && prefix.back() == ' ') prefix.pop_back();
    if (prefix.empty()) continue;
    if (!parse(prefix).accepted()) return prefix;
  }
  // unreachable for any parseable gold: a one-byte prefix never parses
  return gold.substr(0, 1);
}

}  // namespace detail

inline MutationResult mutate(const std::string& gold, MutationKind kind, SplitMix& rng,
                             const std::vector<std::string>& schema_labels) {
  MutationResult result;
  result.requested = kind;
  result.applied = kind;
  LexResult lexed = tokenize(gold);
  const auto& toks = lexed.tokens;

  auto fallback = [&]() {
    result.applied = MutationKind::TruncateTail;
    result.text = detail::truncate_invalid(gold, rng);
    return result;
  };

  switch (kind) {
    case MutationKind::Identity:
      result.text = gold;
      return result;

    case MutationKind::TruncateTail:
      result.text = detail::truncate_invalid(gold, rng);
      return result;

    case MutationKind::DropBracket: {
      std::vector<std::size_t> offsets;
      for (const auto& t : toks)
        if (t.kind == TokenKind::Symbol && t.text.size() == 1 &&
            std::string("()[]{}").find(t.text[0]) != std::string::npos)
          offsets.push_back(t.pos.offset);
      if (offsets.empty()) return fallback();
      std::size_t at = offsets[rng.next_below(offsets.size())];
      result.text = gold;
      result.text.erase(at, 1);
      return result;
    }

    case MutationKind::DuplicateClauseKeyword: {
      std::vector<const CypherToken*> keywords;
      for (const auto& t : toks)
        if (t.kind == TokenKind::Keyword &&
            clause_keyword_set().count(ascii_upper(t.text)))
          keywords.push_back(&t);
      if (keywords.empty()) return fallback();
      const CypherToken* target = keywords[rng.next_below(keywords.size())];
      result.text = gold;
      result.text.insert(target->pos.offset + target->text.size(),
                         " " + target->text);
      return result;
    }

    case MutationKind::FlipDirection: {
      auto sites = detail::find_arrow_sites(toks);
      if (sites.empty()) return fallback();
      result.text = detail::apply_flip(gold, sites[rng.next_below(sites.size())]);
      return result;
    }

    case MutationKind::LabelSwap: {
      auto candidates = detail::safe_label_tokens(toks);
      if (candidates.empty() || schema_labels.empty()) return fallback();
      std::size_t tok_idx = candidates[rng.next_below(candidates.size())];
      const CypherToken& label_tok = toks[tok_idx];
      std::vector<std::string> choices;
      for (const auto& l : schema_labels)
        if (l != unquote_name(label_tok.text)) choices.push_back(l);
      if (choices.empty()) return fallback();
      const std::string& replacement = choices[rng.next_below(choices.size())];
      result.text = gold;
      result.text.replace(label_tok.pos.offset, label_tok.text.size(), replacement);
      return result;
    }
  }
  return fallback();
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

struct SynthConfig {
  std::size_t n_questions = 50;
  std::size_t n_traces = 16;
  double p_syntax_error = 0.0;
  double p_direction_error = 0.0;
  double p_label_error = 0.0;
  double confidence_gap = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (p_syntax_error < 0 || p_direction_error < 0 || p_label_error < 0)
      throw std::invalid_argument("mutation probabilities must be non-negative");
    if (p_syntax_error + p_direction_error + p_label_error > 1.0 + 1e-12)
      throw std::invalid_argument("mutation probabilities must sum to at most 1");
    if (n_traces == 0) throw std::invalid_argument("n_traces must be positive");
    if (confidence_gap < 0)
      throw std::invalid_argument("confidence_gap must be non-negative");
  }
};

class SynthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Token confidences separate the clean traces from the corrupted ones by
// `gap` on average; that coupling is what gives the confidence stage its
// signal, and gap = 0 switches it off for ablations.
inline std::vector<TokenStep> synth_tokens(const std::string& text, bool corrupted,
                                           double gap, SplitMix& rng) {
  constexpr double kBaseConfidence = 1.5;
  constexpr double kNoise = 0.5;
  const double mean = corrupted ? kBaseConfidence : kBaseConfidence + gap;
  std::size_t count = std::max<std::size_t>(4, (text.size() + 3) / 4);
  std::vector<TokenStep> steps;
  steps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double confidence = mean + kNoise * rng.next_normal();
    if (confidence < 0.0) confidence = 0.0;
    TokenStep step;
    step.topk_logprobs = {-confidence, -confidence, -confidence};
    steps.push_back(std::move(step));
  }
  return steps;
}

inline std::string cosmetic_wrap(const std::string& text, SplitMix& rng) {
  switch (rng.next_below(4)) {
    case 0: return "cypher: " + text;
    case 1: return "```cypher\n" + text + "\n```";
    case 2: return text + ";";
    default: return text;
  }
}

}  // namespace detail

// Derives a full synthetic dataset from the gold pool. Every gold must
// execute on the fixture graph. Per-question failure modes are systematic:
// the syntax-error subkind and each kind's mutation site are drawn once per
// question, so repeated draws of a kind yield the same wrong candidate, the
// way sampled LLM failures repeat.
inline std::vector<QuestionRecord> generate(const std::vector<std::string>& gold_pool,
                                            const MicroGraph& graph,
                                            const std::string& schema_text,
                                            const SynthConfig& config) {
  config.validate();
  if (gold_pool.empty()) throw SynthError("gold pool is empty");

  GraphSchema schema = parse_schema(schema_text);
  std::vector<std::string> schema_labels;
  {
    std::set<std::string> labels;
    for (const auto& t : schema.triples) {
      labels.insert(t.source_label);
      labels.insert(t.target_label);
    }
    schema_labels.assign(labels.begin(), labels.end());
  }

  for (const auto& gold : gold_pool) {
    auto outcome = execute_micro(graph, gold);
    if (outcome.status != ExecStatus::Success)
      throw SynthError("gold query fails on the fixture graph: " + gold + " (" +
                       outcome.message + ")");
  }

  static constexpr MutationKind kSyntaxKinds[] = {
      MutationKind::DropBracket, MutationKind::DuplicateClauseKeyword,
      MutationKind::TruncateTail};

  std::vector<QuestionRecord> records;
  records.reserve(config.n_questions);
  for (std::size_t qi = 0; qi < config.n_questions; ++qi) {
    const std::string& gold = gold_pool[qi % gold_pool.size()];
    std::uint64_t qseed = derive_seed(config.seed, qi + 1);

    QuestionRecord rec;
    {
      std::ostringstream id;
      id << "synth-" << qi;
      rec.question_id = id.str();
    }
    rec.question = "Synthetic question " + std::to_string(qi) +
                   " targeting the fixture graph";
    rec.gold_query = gold;
    rec.schema_text = schema_text;

    // this question's characteristic syntax failure
    SplitMix kind_rng(derive_seed(qseed, 101));
    MutationKind syntax_kind = kSyntaxKinds[kind_rng.next_below(3)];

    // one mutation site per kind per question
    auto mutated_text = [&](MutationKind kind) {
      SplitMix site_rng(derive_seed(qseed, 200 + static_cast<std::uint64_t>(kind)));
      return mutate(gold, kind, site_rng, schema_labels);
    };
    std::optional<MutationResult> syntax_mut, flip_mut, label_mut;

    SplitMix draw_rng(derive_seed(qseed, 102));
    for (std::size_t ti = 0; ti < config.n_traces; ++ti) {
      double u = draw_rng.next_double();
      MutationResult mut;
      if (u < config.p_syntax_error) {
        if (!syntax_mut) syntax_mut = mutated_text(syntax_kind);
        mut = *syntax_mut;
      } else if (u < config.p_syntax_error + config.p_direction_error) {
        if (!flip_mut) flip_mut = mutated_text(MutationKind::FlipDirection);
        mut = *flip_mut;
      } else if (u <
                 config.p_syntax_error + config.p_direction_error + config.p_label_error) {
        if (!label_mut) label_mut = mutated_text(MutationKind::LabelSwap);
        mut = *label_mut;
      } else {
        mut.requested = mut.applied = MutationKind::Identity;
        mut.text = gold;
      }

      SplitMix trace_rng(derive_seed(qseed, 1000 + ti));
      CandidateTrace trace;
      trace.trace_id = "t" + std::to_string(ti);
      bool corrupted = mut.applied != MutationKind::Identity;
      trace.raw_text = detail::cosmetic_wrap(mut.text, trace_rng);
      trace.tokens =
          detail::synth_tokens(mut.text, corrupted, config.confidence_gap, trace_rng);
      rec.traces.push_back(std::move(trace));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace cyfunnel
