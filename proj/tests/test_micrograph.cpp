#include "cyfunnel/micrograph.hpp"

#include <gtest/gtest.h>

#include "test_paths.hpp"

using namespace cyfunnel;

namespace {

const MicroGraph& fixture() {
  static MicroGraph graph = MicroGraph::load_file(test_data_path("fixture_graph.json"));
  return graph;
}

}  // namespace

TEST(MicroGraph, LoadsFixture) {
  const auto& g = fixture();
  EXPECT_EQ(g.nodes.size(), 11u);
  EXPECT_EQ(g.edges.size(), 14u);
}

TEST(MicroGraph, EdgeToUnknownNodeRejected) {
  auto doc = nlohmann::json::parse(
      R"({"nodes":[{"id":1,"labels":["A"],"props":{}}],
          "edges":[{"src":1,"type":"R","dst":2,"props":{}}]})");
  EXPECT_THROW(MicroGraph::from_json(doc), GraphError);
}

TEST(ExecuteMicro, ProjectsNodeProperties) {
  auto out = execute_micro(fixture(), "MATCH (p:Person) RETURN p.name");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows, (std::vector<std::string>{"[\"Alice\"]", "[\"Bob\"]",
                                                "[\"Carol\"]", "[\"Dave\"]"}));
}

TEST(ExecuteMicro, MalformedQueryIsSyntaxError) {
  auto out = execute_micro(fixture(), "MATCH (n RETURN n");
  EXPECT_EQ(out.status, ExecStatus::SyntaxError);
  EXPECT_TRUE(out.rows.empty());
}

TEST(ExecuteMicro, CountStar) {
  auto out = execute_micro(fixture(),
                           "MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN count(*)");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows, std::vector<std::string>{"[4]"});
}

TEST(ExecuteMicro, DirectionMatters) {
  auto forward = execute_micro(
      fixture(), "MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN count(*)");
  auto backward = execute_micro(
      fixture(), "MATCH (p:Person)<-[:ACTED_IN]-(m:Movie) RETURN count(*)");
  EXPECT_EQ(forward.rows[0], "[4]");
  EXPECT_EQ(backward.rows[0], "[0]");
}

TEST(ExecuteMicro, UndirectedIsUnionOfBothDirections) {
  auto undirected = execute_micro(
      fixture(), "MATCH (p:Person)-[:ACTED_IN]-(x) RETURN count(*)");
  EXPECT_EQ(undirected.rows[0], "[4]");
  // flipping one endpoint of an undirected hop changes nothing
  auto via_movie = execute_micro(
      fixture(), "MATCH (m:Movie)-[:ACTED_IN]-(x) RETURN count(*)");
  EXPECT_EQ(via_movie.rows[0], "[4]");
}

TEST(ExecuteMicro, WhereComparisonsAndLogic) {
  auto out = execute_micro(
      fixture(), "MATCH (m:Movie) WHERE m.year >= 2000 AND m.title <> 'Memento' "
                 "RETURN m.title");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows, std::vector<std::string>{"[\"Inception\"]"});

  auto or_out = execute_micro(
      fixture(), "MATCH (u:User) WHERE u.age > 30 OR u.name = 'Vic' RETURN u.name");
  EXPECT_EQ(or_out.rows, (std::vector<std::string>{"[\"Uma\"]", "[\"Vic\"]"}));
}

TEST(ExecuteMicro, OrderByDescLimitAlias) {
  auto out = execute_micro(
      fixture(), "MATCH (m:Movie) RETURN m.title AS title ORDER BY title DESC LIMIT 2");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows, (std::vector<std::string>{"[\"The Matrix\"]", "[\"Memento\"]"}));
}

TEST(ExecuteMicro, OrderByPropertyOfNonReturnedVariable) {
  auto out = execute_micro(
      fixture(), "MATCH (m:Movie) RETURN m.title ORDER BY m.year");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows, (std::vector<std::string>{"[\"The Matrix\"]", "[\"Memento\"]",
                                                "[\"Inception\"]"}));
}

TEST(ExecuteMicro, DistinctDeduplicates) {
  auto all = execute_micro(fixture(),
                           "MATCH (m:Movie)-[:IN_GENRE]->(g:Genre) RETURN g.name");
  EXPECT_EQ(all.rows.size(), 4u);
  auto distinct = execute_micro(
      fixture(), "MATCH (m:Movie)-[:IN_GENRE]->(g:Genre) RETURN DISTINCT g.name");
  EXPECT_EQ(distinct.rows,
            (std::vector<std::string>{"[\"Action\"]", "[\"Drama\"]"}));
}

TEST(ExecuteMicro, PropertyMapFilters) {
  auto out = execute_micro(
      fixture(), "MATCH (p:Person {name: 'Alice'})-[:ACTED_IN]->(m) RETURN m.title");
  EXPECT_EQ(out.rows.size(), 2u);
  auto rel_prop = execute_micro(
      fixture(), "MATCH (u)-[:RATED {stars: 5}]->(m) RETURN m.title");
  EXPECT_EQ(rel_prop.rows, std::vector<std::string>{"[\"The Matrix\"]"});
}

TEST(ExecuteMicro, MissingPropertyIsNull) {
  auto out = execute_micro(fixture(), "MATCH (g:Genre) RETURN g.year");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows, (std::vector<std::string>{"[null]", "[null]"}));
  // null never satisfies a comparison
  auto cmp = execute_micro(fixture(),
                           "MATCH (g:Genre) WHERE g.year > 0 RETURN count(*)");
  EXPECT_EQ(cmp.rows[0], "[0]");
}

TEST(ExecuteMicro, NodeSerializationSortedKeys) {
  auto out = execute_micro(fixture(), "MATCH (g:Genre {name: 'Action'}) RETURN g");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows[0], R"([{"labels":["Genre"],"props":{"name":"Action"}}])");
}

TEST(ExecuteMicro, RelationshipSerialization) {
  auto out = execute_micro(
      fixture(), "MATCH (u:User {name: 'Vic'})-[r:RATED]->(m) RETURN r");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows[0], R"([{"props":{"stars":3},"type":"RATED"}])");
}

TEST(ExecuteMicro, RepeatedVariableMustRebindConsistently) {
  auto out = execute_micro(fixture(), "MATCH (a)-[:ACTED_IN]->(a) RETURN count(*)");
  EXPECT_EQ(out.rows[0], "[0]");
}

TEST(ExecuteMicro, ChainWithEdgeUniqueness) {
  // Alice and Bob both acted in The Matrix: pairs via a shared movie, with
  // the two hops forced onto distinct edges.
  auto out = execute_micro(
      fixture(),
      "MATCH (a:Person)-[:ACTED_IN]->(m:Movie)<-[:ACTED_IN]-(b:Person) "
      "RETURN a.name, b.name");
  ASSERT_EQ(out.status, ExecStatus::Success);
  EXPECT_EQ(out.rows, (std::vector<std::string>{"[\"Alice\",\"Bob\"]",
                                                "[\"Bob\",\"Alice\"]"}));
}

TEST(ExecuteMicro, Deterministic) {
  const char* q = "MATCH (p:Person)-[:ACTED_IN]->(m) RETURN p.name, m.title";
  auto a = execute_micro(fixture(), q);
  auto b = execute_micro(fixture(), q);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.status, b.status);
}

TEST(ExecuteMicro, WriteClausesAreReadOnlyErrors) {
  for (const char* q : {"CREATE (n:Person {name: 'X'})", "MATCH (n) DELETE n",
                        "MATCH (n) SET n.x = 1", "MERGE (n:Person)",
                        "MATCH (n) REMOVE n.x", "MATCH (n) DETACH DELETE n"}) {
    auto out = execute_micro(fixture(), q);
    EXPECT_EQ(out.status, ExecStatus::RuntimeError) << q;
    EXPECT_NE(out.message.find("read-only"), std::string::npos) << q;
  }
}

TEST(ExecuteMicro, InGrammarButOutsideSubsetIsRuntime) {
  for (const char* q :
       {"MATCH (n) WITH n RETURN n", "UNWIND [1,2] AS x RETURN x",
        "CALL db.labels() YIELD label RETURN label",
        "MATCH (a)-[:R*1..3]->(b) RETURN a", "MATCH (a), (b) RETURN a",
        "MATCH (n) MATCH (m) RETURN n",
        "MATCH (n) RETURN n.name UNION MATCH (m) RETURN m.name",
        "OPTIONAL MATCH (n) RETURN n", "MATCH (n) RETURN *",
        "MATCH (n) RETURN n SKIP 2",
        "MATCH (n) WHERE n.x IS NULL RETURN n",
        "MATCH (n) WHERE n.a + 1 > 2 RETURN n"}) {
    auto out = execute_micro(fixture(), q);
    EXPECT_EQ(out.status, ExecStatus::RuntimeError) << q << " -> " << out.message;
    EXPECT_NE(out.message.find("unsupported"), std::string::npos) << q;
  }
}

TEST(ExecuteMicro, SyntaxJudgmentsOfItsOwn) {
  for (const char* q :
       {"RETURN RETURN 1", "MATCH MATCH (n) RETURN n", "MATCH (n)",
        "MATCH (n) RETURN n WHERE n.x = 1", "MATCH (n) RETURN n ORDER 1",
        "MATCH (n) WHERE > 1 RETURN n", "MATCH (n) RETURN 'open",
        "WHERE n.x = 1 RETURN n", "MATCH (n) RETURN x.name"}) {
    auto out = execute_micro(fixture(), q);
    EXPECT_EQ(out.status, ExecStatus::SyntaxError) << q << " -> " << out.message;
  }
}

TEST(ExecuteMicro, TruthyPropertyCondition) {
  auto doc = nlohmann::json::parse(
      R"({"nodes":[{"id":1,"labels":["T"],"props":{"flag":true}},
                   {"id":2,"labels":["T"],"props":{"flag":false}}],
          "edges":[]})");
  auto g = MicroGraph::from_json(doc);
  auto out = execute_micro(g, "MATCH (t:T) WHERE t.flag RETURN count(*)");
  EXPECT_EQ(out.rows[0], "[1]");
}

TEST(ExecuteMicro, LimitZero) {
  auto out = execute_micro(fixture(), "MATCH (n:Person) RETURN n.name LIMIT 0");
  EXPECT_EQ(out.status, ExecStatus::Success);
  EXPECT_TRUE(out.rows.empty());
}
