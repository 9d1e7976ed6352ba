#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace cyfunnel {

// Lowercases and splits on every non-alphanumeric byte, dropping empties.
inline std::vector<std::string> rouge_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc < 0x80 && std::isalnum(uc)) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// ROUGE-L F1: R = LCS/|ref|, P = LCS/|pred|, F1 = 2RP/(R+P).
// Zero when either side is empty or nothing overlaps.
inline double rouge_l(const std::vector<std::string>& pred_tokens,
                      const std::vector<std::string>& ref_tokens) {
  if (pred_tokens.empty() || ref_tokens.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(pred_tokens, ref_tokens));
  if (lcs == 0.0) return 0.0;
  const double recall = lcs / static_cast<double>(ref_tokens.size());
  const double precision = lcs / static_cast<double>(pred_tokens.size());
  return 2.0 * recall * precision / (recall + precision);
}

inline double rouge_l_text(std::string_view pred, std::string_view ref) {
  return rouge_l(rouge_tokenize(pred), rouge_tokenize(ref));
}

}  // namespace cyfunnel
