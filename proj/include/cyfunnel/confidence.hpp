#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cyfunnel/trace.hpp"

namespace cyfunnel {

// Mean negated log-probability over the recorded top-k candidates.
// Higher means a more peaked distribution at this position.
inline double token_confidence(const TokenStep& step) {
  if (step.topk_logprobs.empty())
    throw std::invalid_argument("token_confidence: empty logprob list");
  double sum = 0.0;
  for (double lp : step.topk_logprobs) sum += -lp;
  return sum / static_cast<double>(step.topk_logprobs.size());
}

// Sliding-window means of width w. A sequence shorter than the window
// yields a single group covering everything.
inline std::vector<double> group_confidences(const std::vector<double>& token_confs,
                                             std::size_t w) {
  if (w == 0) throw std::invalid_argument("group_confidences: window must be >= 1");
  if (token_confs.empty())
    throw std::invalid_argument("group_confidences: empty confidence list");
  const std::size_t n = token_confs.size();
  std::vector<double> groups;
  if (n <= w) {
    double mean = std::accumulate(token_confs.begin(), token_confs.end(), 0.0) /
                  static_cast<double>(n);
    groups.push_back(mean);
    return groups;
  }
  groups.reserve(n - w + 1);
  double window_sum = std::accumulate(token_confs.begin(), token_confs.begin() + w, 0.0);
  groups.push_back(window_sum / static_cast<double>(w));
  for (std::size_t i = w; i < n; ++i) {
    window_sum += token_confs[i] - token_confs[i - w];
    groups.push_back(window_sum / static_cast<double>(w));
  }
  return groups;
}

// Per-trace confidence statistics. Traces with no tokens score zero.
struct TraceConfidence {
  std::vector<double> token_confidences;
  std::vector<double> group_confidences;
  double lowest_group = 0.0;
  double mean_confidence = 0.0;

  static TraceConfidence from_trace(const CandidateTrace& trace, std::size_t w) {
    TraceConfidence tc;
    if (trace.tokens.empty()) return tc;
    tc.token_confidences.reserve(trace.tokens.size());
    for (const auto& step : trace.tokens)
      tc.token_confidences.push_back(token_confidence(step));
    tc.group_confidences = cyfunnel::group_confidences(tc.token_confidences, w);
    tc.lowest_group =
        *std::min_element(tc.group_confidences.begin(), tc.group_confidences.end());
    tc.mean_confidence = std::accumulate(tc.token_confidences.begin(),
                                         tc.token_confidences.end(), 0.0) /
                         static_cast<double>(tc.token_confidences.size());
    return tc;
  }
};

// Indices of the ceil(keep_ratio * N) candidates with the highest scores.
// Ties keep the earlier candidate; the result preserves input order.
inline std::vector<std::size_t> offline_filter_indices(const std::vector<double>& scores,
                                                       double keep_ratio) {
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0))
    throw std::invalid_argument("offline_filter: keep_ratio must be in (0, 1]");
  const std::size_t n = scores.size();
  if (n == 0) return {};
  auto keep = static_cast<std::size_t>(
      std::ceil(keep_ratio * static_cast<double>(n) - 1e-12));
  keep = std::clamp<std::size_t>(keep, 1, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

template <typename T>
std::vector<T> offline_filter(const std::vector<T>& candidates,
                              const std::vector<double>& scores, double keep_ratio) {
  if (candidates.size() != scores.size())
    throw std::invalid_argument("offline_filter: candidates/scores size mismatch");
  std::vector<T> kept;
  for (std::size_t i : offline_filter_indices(scores, keep_ratio))
    kept.push_back(candidates[i]);
  return kept;
}

// Nearest-rank (1 - keep_ratio) quantile of the warmup scores. Traces whose
// lowest group falls below this threshold are terminated in online mode.
inline double calibrate_threshold(std::vector<double> warmup_scores, double keep_ratio) {
  if (warmup_scores.empty())
    throw std::invalid_argument("calibrate_threshold: no warmup scores");
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0))
    throw std::invalid_argument("calibrate_threshold: keep_ratio must be in (0, 1]");
  std::sort(warmup_scores.begin(), warmup_scores.end());
  const auto n = static_cast<double>(warmup_scores.size());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - keep_ratio) * n - 1e-12));
  if (rank < 1) rank = 1;
  if (rank > warmup_scores.size()) rank = warmup_scores.size();
  return warmup_scores[rank - 1];
}

// Outcome of replaying one recorded trace against a calibrated threshold.
struct OnlineOutcome {
  bool kept = true;
  std::size_t terminated_at = 0;  // token index where decoding would stop
  std::size_t tokens_saved = 0;   // tokens after the termination point
};

// Scans group confidences left to right; the first group mean below the
// threshold stops the trace at that group's last token.
inline OnlineOutcome online_simulate(const std::vector<double>& token_confs,
                                     std::size_t w, double threshold) {
  if (token_confs.empty())
    throw std::invalid_argument("online_simulate: trace has no tokens");
  const std::size_t n = token_confs.size();
  const auto groups = group_confidences(token_confs, w);
  OnlineOutcome out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g] < threshold) {
      std::size_t last_token = (n <= w) ? n - 1 : g + w - 1;
      out.kept = false;
      out.terminated_at = last_token;
      out.tokens_saved = n - (last_token + 1);
      return out;
    }
  }
  return out;
}

inline OnlineOutcome online_simulate(const CandidateTrace& trace, std::size_t w,
                                     double threshold) {
  std::vector<double> confs;
  confs.reserve(trace.tokens.size());
  for (const auto& step : trace.tokens) confs.push_back(token_confidence(step));
  return online_simulate(confs, w, threshold);
}

}  // namespace cyfunnel
