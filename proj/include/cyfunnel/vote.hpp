#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyfunnel/lexer.hpp"
#include "cyfunnel/postprocess.hpp"
#include "cyfunnel/trace.hpp"

namespace cyfunnel {

// Canonical vote key: post-processed text with keyword tokens uppercased.
// Identifiers and quoted strings stay byte-exact. Idempotent.
inline std::string vote_key(std::string_view text) {
  std::string normalized = postprocess_raw(text);
  LexResult lexed = tokenize(normalized);
  if (!lexed.ok()) return normalized;
  for (const auto& tok : lexed.tokens) {
    if (tok.kind != TokenKind::Keyword) continue;
    for (std::size_t i = 0; i < tok.text.size(); ++i) {
      char& c = normalized[tok.pos.offset + i];
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return normalized;
}

struct VoteCandidate {
  std::string trace_id;
  std::string text;  // post-processed
  double mean_confidence = 0.0;
};

// Winning prediction. query is empty (has_value() == false) exactly when no
// candidate survived the funnel.
struct Prediction {
  std::optional<std::string> query;
  int support_count = 0;
  double total_confidence = 0.0;
  std::vector<std::string> contributors;  // trace ids, sorted

  bool empty() const { return !query.has_value(); }
};

// Majority or confidence-weighted voting over normalized query keys.
// Deterministic and invariant under candidate order: ties break by higher
// total confidence, then lexicographically smaller key; the representative
// text is the highest-confidence contributor's (text, trace_id as tie-break).
inline Prediction vote(const std::vector<VoteCandidate>& candidates, VoteMode mode) {
  Prediction result;
  if (candidates.empty()) return result;

  struct Bucket {
    std::vector<const VoteCandidate*> members;
  };
  std::map<std::string, Bucket> buckets;
  for (const auto& c : candidates) buckets[vote_key(c.text)].members.push_back(&c);

  const std::string* best_key = nullptr;
  double best_score = 0.0, best_conf = 0.0;
  for (auto& [key, bucket] : buckets) {
    // Fixed summation order keeps float totals permutation-invariant.
    std::sort(bucket.members.begin(), bucket.members.end(),
              [](const VoteCandidate* a, const VoteCandidate* b) {
                return a->trace_id < b->trace_id;
              });
    double total_conf = 0.0;
    for (const auto* m : bucket.members) total_conf += m->mean_confidence;
    double score = mode == VoteMode::Majority
                       ? static_cast<double>(bucket.members.size())
                       : total_conf;
    bool better = false;
    if (!best_key) {
      better = true;
    } else if (score != best_score) {
      better = score > best_score;
    } else if (total_conf != best_conf) {
      better = total_conf > best_conf;
    }  // else: keys iterate in ascending order, first one wins the lex tie
    if (better) {
      best_key = &key;
      best_score = score;
      best_conf = total_conf;
    }
  }

  const Bucket& winner = buckets.at(*best_key);
  const VoteCandidate* representative = nullptr;
  for (const auto* m : winner.members) {
    if (!representative || m->mean_confidence > representative->mean_confidence ||
        (m->mean_confidence == representative->mean_confidence &&
         (m->text < representative->text ||
          (m->text == representative->text && m->trace_id < representative->trace_id))))
      representative = m;
  }

  result.query = representative->text;
  result.support_count = static_cast<int>(winner.members.size());
  result.total_confidence = best_conf;
  for (const auto* m : winner.members) result.contributors.push_back(m->trace_id);
  std::sort(result.contributors.begin(), result.contributors.end());
  return result;
}

}  // namespace cyfunnel
