#include "cyfunnel/vote.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace cyfunnel;

TEST(VoteKey, UppercasesKeywords) {
  EXPECT_EQ(vote_key("match (n) return n"), "MATCH (n) RETURN n");
}

TEST(VoteKey, FixedPointOnNormalizedText) {
  EXPECT_EQ(vote_key("MATCH (n) RETURN n"), "MATCH (n) RETURN n");
}

TEST(VoteKey, QuotedRegionsUntouched) {
  EXPECT_EQ(vote_key("RETURN 'Match'"), "RETURN 'Match'");
  EXPECT_EQ(vote_key("return `match`"), "RETURN `match`");
}

TEST(VoteKey, Idempotent) {
  const char* cases[] = {
      "match (n) where n.x = 1 return n",
      "cypher: MATCH (n)   RETURN n;",
      "```cypher\nmatch (n) return n\n```",
  };
  for (const char* c : cases) {
    auto once = vote_key(c);
    EXPECT_EQ(vote_key(once), once) << c;
  }
}

TEST(VoteKey, IdentifiersPreserved) {
  EXPECT_EQ(vote_key("match (Return_value) return Return_value"),
            "MATCH (Return_value) RETURN Return_value");
}

namespace {

VoteCandidate cand(const std::string& id, const std::string& text, double conf) {
  return {id, text, conf};
}

}  // namespace

TEST(Vote, StrictMajorityWins) {
  auto p = vote({cand("a", "Q1", 1.0), cand("b", "Q1", 1.0), cand("c", "Q2", 9.0)},
                VoteMode::Majority);
  ASSERT_FALSE(p.empty());
  EXPECT_EQ(*p.query, "Q1");
  EXPECT_EQ(p.support_count, 2);
  EXPECT_EQ(p.contributors, (std::vector<std::string>{"a", "b"}));
}

TEST(Vote, CountTieBrokenByConfidence) {
  auto p = vote({cand("a", "Q1", 2.0), cand("b", "Q2", 3.0)}, VoteMode::Majority);
  EXPECT_EQ(*p.query, "Q2");
  EXPECT_DOUBLE_EQ(p.total_confidence, 3.0);
}

TEST(Vote, FullTieBrokenByLexicographicKey) {
  auto p = vote({cand("a", "QB", 1.0), cand("b", "QA", 1.0)}, VoteMode::Majority);
  EXPECT_EQ(*p.query, "QA");
}

TEST(Vote, EmptyInputGivesEmptyPrediction) {
  auto p = vote({}, VoteMode::Majority);
  EXPECT_TRUE(p.empty());
  EXPECT_EQ(p.support_count, 0);
}

TEST(Vote, ConfidenceWeightedMode) {
  // one high-confidence candidate outweighs two low ones in weighted mode
  auto p = vote({cand("a", "Q1", 0.5), cand("b", "Q1", 0.5), cand("c", "Q2", 2.0)},
                VoteMode::ConfidenceWeighted);
  EXPECT_EQ(*p.query, "Q2");
  auto m = vote({cand("a", "Q1", 0.5), cand("b", "Q1", 0.5), cand("c", "Q2", 2.0)},
                VoteMode::Majority);
  EXPECT_EQ(*m.query, "Q1");
}

TEST(Vote, EquivalentTextsShareAKey) {
  auto p = vote({cand("a", "match (n) return n", 1.0),
                 cand("b", "MATCH (n) RETURN n", 2.0), cand("c", "other", 5.0)},
                VoteMode::Majority);
  EXPECT_EQ(p.support_count, 2);
  // representative text comes from the highest-confidence contributor
  EXPECT_EQ(*p.query, "MATCH (n) RETURN n");
}

TEST(Vote, PermutationInvariance) {
  std::vector<VoteCandidate> candidates = {
      cand("t0", "match (n) return n", 1.25), cand("t1", "MATCH (n) RETURN n", 1.5),
      cand("t2", "MATCH (m) RETURN m", 1.5),  cand("t3", "MATCH (m) RETURN m", 1.25),
      cand("t4", "RETURN 1", 3.0),
  };
  for (auto mode : {VoteMode::Majority, VoteMode::ConfidenceWeighted}) {
    auto base = vote(candidates, mode);
    std::mt19937 rng(17);
    for (int i = 0; i < 50; ++i) {
      auto shuffled = candidates;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      auto p = vote(shuffled, mode);
      EXPECT_EQ(p.query, base.query);
      EXPECT_EQ(p.support_count, base.support_count);
      EXPECT_EQ(p.total_confidence, base.total_confidence);
      EXPECT_EQ(p.contributors, base.contributors);
    }
  }
}

TEST(Vote, StrictMajorityBeatsAnyConfidence) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> conf(0.1, 5.0);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<VoteCandidate> candidates;
    for (int i = 0; i < 5; ++i)
      candidates.push_back(cand("w" + std::to_string(i), "WINNER", conf(rng)));
    for (int i = 0; i < 4; ++i)
      candidates.push_back(cand("l" + std::to_string(i), "LOSER" + std::to_string(i),
                                conf(rng) + 10.0));
    std::shuffle(candidates.begin(), candidates.end(), rng);
    auto p = vote(candidates, VoteMode::Majority);
    EXPECT_EQ(*p.query, "WINNER");
  }
}
