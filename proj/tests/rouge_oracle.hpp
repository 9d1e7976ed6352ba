#pragma once

// Brute-force ROUGE-L oracle for tests: enumerates every subsequence of the
// prediction by bitmask and keeps the longest that is also a subsequence of
// the reference. Exponential in |pred|, so only usable for short sequences,
// which is exactly why it is trustworthy as an oracle.

#include <cstddef>
#include <string>
#include <vector>

namespace rouge_test {

inline bool is_subsequence(const std::vector<std::string>& needle,
                           const std::vector<std::string>& haystack) {
  std::size_t i = 0;
  for (const auto& item : haystack) {
    if (i < needle.size() && needle[i] == item) ++i;
  }
  return i == needle.size();
}

inline std::size_t lcs_brute_force(const std::vector<std::string>& a,
                                   const std::vector<std::string>& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::size_t mask = 0; mask < (1ull << n); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ull << i)) sub.push_back(a[i]);
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

inline double rouge_l_brute_force(const std::vector<std::string>& pred,
                                  const std::vector<std::string>& ref) {
  if (pred.empty() || ref.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_brute_force(pred, ref));
  if (lcs == 0.0) return 0.0;
  const double recall = lcs / static_cast<double>(ref.size());
  const double precision = lcs / static_cast<double>(pred.size());
  return 2.0 * recall * precision / (recall + precision);
}

}  // namespace rouge_test
