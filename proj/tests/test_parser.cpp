#include "cyfunnel/parser.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "test_paths.hpp"

using namespace cyfunnel;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.is_open()) << path;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

// independent bracket-balance check used by the soundness property
bool brackets_balanced(const std::string& text) {
  auto lexed = tokenize(text);
  std::vector<char> stack;
  for (const auto& tok : lexed.tokens) {
    if (tok.kind != TokenKind::Symbol || tok.text.size() != 1) continue;
    char c = tok.text[0];
    if (c == '(' || c == '[' || c == '{') stack.push_back(c);
    if (c == ')' || c == ']' || c == '}') {
      char open = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (stack.empty() || stack.back() != open) return false;
      stack.pop_back();
    }
  }
  return stack.empty();
}

}  // namespace

TEST(Parser, OrderSkipLimitQuery) {
  EXPECT_TRUE(parse("MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN m.title "
                    "ORDER BY m.title SKIP 1 LIMIT 2")
                  .accepted());
}

TEST(Parser, TruncatedReturnRejectedWithMessage) {
  auto r = parse("MATCH (n) RETURN");
  ASSERT_FALSE(r.accepted());
  EXPECT_NE(r.verdict.diagnostics[0].message.find("RETURN"), std::string::npos);
}

TEST(Parser, VarLengthUndirectedNullCheckCountStar) {
  EXPECT_TRUE(
      parse("MATCH (a)-[:R*1..3]-(b) WHERE a.x IS NOT NULL RETURN count(*)")
          .accepted());
}

TEST(Parser, ValidCorpusFullyAccepted) {
  for (const auto& q : read_lines(test_data_path("corpus_valid.txt")))
    EXPECT_TRUE(parse(q).accepted()) << q;
}

TEST(Parser, InvalidCorpusFullyRejectedWithPositions) {
  for (const auto& q : read_lines(test_data_path("corpus_invalid.txt"))) {
    auto r = parse(q);
    EXPECT_FALSE(r.accepted()) << q;
    ASSERT_FALSE(r.verdict.diagnostics.empty()) << q;
    EXPECT_FALSE(r.verdict.diagnostics[0].message.empty()) << q;
    EXPECT_LE(r.verdict.diagnostics[0].pos.offset, q.size()) << q;
  }
}

TEST(Parser, DirectionsRecordedExplicitly) {
  auto r = parse("MATCH (a)-[:X]->(b)<-[:Y]-(c)-[:Z]-(d) RETURN a");
  ASSERT_TRUE(r.accepted());
  const auto& m = std::get<MatchClause>(r.ast->statements[0].clauses[0]);
  const auto& rels = m.patterns[0].element.rels;
  ASSERT_EQ(rels.size(), 3u);
  EXPECT_EQ(rels[0].direction, Direction::Right);
  EXPECT_EQ(rels[1].direction, Direction::Left);
  EXPECT_EQ(rels[2].direction, Direction::Undirected);
}

TEST(Parser, Determinism) {
  const std::string q = "MATCH (n) WHERE n.a > 1 RETURN n LIMIT";
  auto r1 = parse(q);
  auto r2 = parse(q);
  EXPECT_EQ(r1.accepted(), r2.accepted());
  ASSERT_EQ(r1.verdict.diagnostics.size(), r2.verdict.diagnostics.size());
  EXPECT_EQ(r1.verdict.diagnostics[0].message, r2.verdict.diagnostics[0].message);
  EXPECT_EQ(r1.verdict.diagnostics[0].pos, r2.verdict.diagnostics[0].pos);
}

TEST(Parser, AcceptedQueriesHaveBalancedBrackets) {
  for (const auto& q : read_lines(test_data_path("corpus_valid.txt"))) {
    ASSERT_TRUE(parse(q).accepted());
    EXPECT_TRUE(brackets_balanced(q)) << q;
  }
}

TEST(Parser, BracketInsideStringKeepsAcceptance) {
  const std::string base = "MATCH (n) WHERE n.name = 'ab' RETURN n";
  ASSERT_TRUE(parse(base).accepted());
  std::size_t inside = base.find("ab") + 1;
  for (char c : {'(', ')', '[', ']', '{', '}'}) {
    std::string mutated = base;
    mutated.insert(mutated.begin() + static_cast<long>(inside), c);
    EXPECT_TRUE(parse(mutated).accepted()) << mutated;
  }
}

TEST(Parser, DeepNestingRejectedNotCrashed) {
  std::string deep = "RETURN ";
  for (int i = 0; i < 20000; ++i) deep += '(';
  deep += '1';
  auto r = parse(deep);
  EXPECT_FALSE(r.accepted());
}

TEST(Parser, OversizeInputRejected) {
  std::string big(65 * 1024, 'x');
  EXPECT_FALSE(parse(big).accepted());
}

TEST(Parser, TotalOnRandomBytes) {
  std::mt19937 rng(20240818);
  for (int iter = 0; iter < 500; ++iter) {
    std::size_t len = rng() % 200;
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
      s.push_back(static_cast<char>(rng() % 256));
    auto r = parse(s);  // must not crash or throw
    if (r.accepted()) EXPECT_TRUE(r.ast.has_value());
  }
}

TEST(Parser, StatementMustEndInReturnOrUpdate) {
  EXPECT_FALSE(parse("MATCH (n)").accepted());
  EXPECT_FALSE(parse("CALL db.labels()").accepted());  // documented subset choice
  EXPECT_TRUE(parse("MATCH (n) SET n.x = 1").accepted());
  EXPECT_TRUE(parse("MATCH (n) DETACH DELETE n").accepted());
}

TEST(Parser, UnionChains) {
  auto r = parse("RETURN 1 UNION RETURN 2 UNION ALL RETURN 3");
  ASSERT_TRUE(r.accepted());
  ASSERT_EQ(r.ast->statements.size(), 3u);
  EXPECT_FALSE(r.ast->union_all[0]);
  EXPECT_TRUE(r.ast->union_all[1]);
}

TEST(Parser, NothingAfterReturnButUnion) {
  EXPECT_FALSE(parse("MATCH (n) RETURN n MATCH (m) RETURN m").accepted());
}
