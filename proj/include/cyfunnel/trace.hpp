#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyfunnel {

// Top-k log-probabilities recorded at one decoding position.
// Values are natural logs, each <= 0, ordered non-increasing.
struct TokenStep {
  std::vector<double> topk_logprobs;

  bool operator==(const TokenStep&) const = default;
};

// One sampled candidate generation: the raw model text plus its per-token
// top-k log-probabilities. tokens may be empty only when raw_text is empty.
struct CandidateTrace {
  std::string trace_id;
  std::string raw_text;
  std::vector<TokenStep> tokens;

  bool operator==(const CandidateTrace&) const = default;
};

// One benchmark sample: question, gold query, schema text, candidate traces.
struct QuestionRecord {
  std::string question_id;
  std::string question;
  std::string gold_query;
  std::string schema_text;
  std::vector<CandidateTrace> traces;

  bool operator==(const QuestionRecord&) const = default;
};

// Sampling metadata. Recorded in reports, never used in computation.
struct SamplingProfile {
  std::string name;
  double temperature = 0.0;
  double top_p = 0.0;
  int top_k = 0;

  static SamplingProfile moderately_diverse() {
    return {"moderately-diverse", 0.9, 0.99, 60};
  }
  static SamplingProfile very_diverse() {
    return {"very-diverse", 1.2, 0.999, 80};
  }
  static SamplingProfile custom(double temperature, double top_p, int top_k) {
    return {"custom", temperature, top_p, top_k};
  }
};

enum class InferenceMode { Base, Offline, Online };
enum class GrammarVariant { None, Naive, Formal };
enum class VoteMode { Majority, ConfidenceWeighted };

inline const char* to_string(InferenceMode m) {
  switch (m) {
    case InferenceMode::Base: return "base";
    case InferenceMode::Offline: return "offline";
    case InferenceMode::Online: return "online";
  }
  return "?";
}

inline const char* to_string(GrammarVariant v) {
  switch (v) {
    case GrammarVariant::None: return "none";
    case GrammarVariant::Naive: return "naive";
    case GrammarVariant::Formal: return "formal";
  }
  return "?";
}

inline const char* to_string(VoteMode m) {
  return m == VoteMode::Majority ? "majority" : "confidence-weighted";
}

struct PipelineConfig {
  InferenceMode inference_mode = InferenceMode::Base;
  GrammarVariant grammar_variant = GrammarVariant::None;
  bool schema_filter = false;
  double keep_ratio = 0.9;  // fraction of candidates kept by the confidence stage
  int window = 32;          // sliding-window width for group confidence
  VoteMode vote_mode = VoteMode::Majority;
  std::uint64_t seed = 0;
  // Schema filter behavior knobs (see schema.hpp).
  bool schema_label_aware = true;
  bool schema_reject_unknown_types = false;
  std::optional<SamplingProfile> profile;

  void validate() const {
    if (!(keep_ratio > 0.0 && keep_ratio <= 1.0))
      throw std::invalid_argument("keep_ratio must be in (0, 1]");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
  }
};

// Loader-side validation of the TokenStep/CandidateTrace invariants.
// Returns an explanation for the first violation, or nullopt.
inline std::optional<std::string> check_trace(const CandidateTrace& trace) {
  if (trace.tokens.empty()) {
    if (!trace.raw_text.empty())
      return std::optional<std::string>(
          "trace has text but no tokens (tokens may be empty only for an empty generation)");
    return std::nullopt;
  }
  for (std::size_t t = 0; t < trace.tokens.size(); ++t) {
    const auto& lp = trace.tokens[t].topk_logprobs;
    if (lp.empty()) return "token " + std::to_string(t) + " has no logprobs";
    for (std::size_t j = 0; j < lp.size(); ++j) {
      if (!std::isfinite(lp[j]))
        return "token " + std::to_string(t) + " has a non-finite logprob";
      if (lp[j] > 0.0)
        return "token " + std::to_string(t) + " has a positive logprob";
      if (j > 0 && lp[j] > lp[j - 1])
        return "token " + std::to_string(t) + " logprobs are not sorted non-increasing";
    }
  }
  return std::nullopt;
}

}  // namespace cyfunnel
