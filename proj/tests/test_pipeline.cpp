#include "cyfunnel/pipeline.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cyfunnel/synth.hpp"
#include "test_paths.hpp"

using namespace cyfunnel;

namespace {

const MicroGraph& fixture() {
  static MicroGraph graph = MicroGraph::load_file(test_data_path("fixture_graph.json"));
  return graph;
}

std::string fixture_schema_text() {
  std::ifstream in(test_data_path("fixture_schema.txt"));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QueryExecutor micro_exec() {
  return [](const std::string& q) { return execute_micro(fixture(), q); };
}

CandidateTrace trace_with(const std::string& id, const std::string& text,
                          double confidence, std::size_t tokens = 6) {
  CandidateTrace t;
  t.trace_id = id;
  t.raw_text = text;
  for (std::size_t i = 0; i < tokens; ++i)
    t.tokens.push_back({{-confidence}});
  return t;
}

QuestionRecord question_with(std::vector<CandidateTrace> traces,
                             const std::string& gold) {
  QuestionRecord rec;
  rec.question_id = "q";
  rec.question = "?";
  rec.gold_query = gold;
  rec.schema_text = fixture_schema_text();
  rec.traces = std::move(traces);
  return rec;
}

std::vector<std::string> gold_pool() {
  std::ifstream in(test_data_path("gold_pool.cypher"));
  std::vector<std::string> golds;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) golds.push_back(line);
  return golds;
}

}  // namespace

TEST(Pipeline, SingleTracePassthrough) {
  const std::string gold = "MATCH (p:Person) RETURN p.name";
  auto rec = question_with({trace_with("t0", gold, 2.0)}, gold);
  PipelineConfig config;  // base, no filters
  auto report = run_pipeline({rec}, std::nullopt, config, micro_exec());
  ASSERT_EQ(report.questions.size(), 1u);
  EXPECT_EQ(*report.questions[0].prediction.query, gold);
  EXPECT_EQ(report.eval.success, 1u);
  EXPECT_DOUBLE_EQ(report.eval.mean_rouge_lexical, 1.0);
}

TEST(Pipeline, AllFlippedCandidatesYieldEmpty) {
  const std::string gold =
      "MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN p.name, m.title";
  const std::string flipped =
      "MATCH (p:Person)<-[:ACTED_IN]-(m:Movie) RETURN p.name, m.title";
  auto rec = question_with({trace_with("t0", flipped, 2.0),
                            trace_with("t1", flipped, 2.5),
                            trace_with("t2", flipped, 1.5)},
                           gold);
  PipelineConfig config;
  config.inference_mode = InferenceMode::Offline;
  config.grammar_variant = GrammarVariant::Formal;
  config.schema_filter = true;
  auto report = run_pipeline({rec}, std::nullopt, config, micro_exec());
  EXPECT_TRUE(report.questions[0].prediction.empty());
  EXPECT_EQ(report.eval.empty, 1u);
  EXPECT_EQ(report.questions[0].stages.after_schema, 0u);
}

TEST(Pipeline, StageCountsNonIncreasing) {
  SynthConfig sc;
  sc.n_questions = 12;
  sc.n_traces = 8;
  sc.p_syntax_error = 0.4;
  sc.p_direction_error = 0.3;
  sc.seed = 5;
  auto records = generate(gold_pool(), fixture(), fixture_schema_text(), sc);
  PipelineConfig config;
  config.inference_mode = InferenceMode::Offline;
  config.grammar_variant = GrammarVariant::Formal;
  config.schema_filter = true;
  auto report = run_pipeline(records, std::nullopt, config, micro_exec());
  for (const auto& q : report.questions) {
    EXPECT_LE(q.stages.after_confidence, q.stages.input);
    EXPECT_LE(q.stages.after_grammar, q.stages.after_confidence);
    EXPECT_LE(q.stages.after_schema, q.stages.after_grammar);
  }
}

TEST(Pipeline, FunnelRecordsPartitionTraces) {
  SynthConfig sc;
  sc.n_questions = 6;
  sc.n_traces = 10;
  sc.p_syntax_error = 0.5;
  sc.p_direction_error = 0.2;
  sc.seed = 8;
  auto records = generate(gold_pool(), fixture(), fixture_schema_text(), sc);
  for (auto mode : {InferenceMode::Base, InferenceMode::Offline, InferenceMode::Online}) {
    PipelineConfig config;
    config.inference_mode = mode;
    config.grammar_variant = GrammarVariant::Naive;
    config.schema_filter = true;
    auto report = run_pipeline(records, std::nullopt, config, micro_exec());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& q = report.questions[i];
      ASSERT_EQ(q.funnel.size(), records[i].traces.size());
      for (std::size_t t = 0; t < q.funnel.size(); ++t)
        EXPECT_EQ(q.funnel[t].trace_id, records[i].traces[t].trace_id);
      std::size_t survivors = 0;
      for (const auto& rec : q.funnel)
        if (rec.removed_at == FunnelStage::Survived) ++survivors;
      EXPECT_EQ(survivors, q.stages.after_schema);
    }
  }
}

TEST(Pipeline, DeterministicReportBytes) {
  SynthConfig sc;
  sc.n_questions = 8;
  sc.n_traces = 6;
  sc.p_syntax_error = 0.3;
  sc.p_direction_error = 0.3;
  sc.seed = 13;
  auto records = generate(gold_pool(), fixture(), fixture_schema_text(), sc);
  PipelineConfig config;
  config.inference_mode = InferenceMode::Online;
  config.grammar_variant = GrammarVariant::Formal;
  config.schema_filter = true;
  auto a = run_pipeline(records, std::nullopt, config, micro_exec(), 1);
  auto b = run_pipeline(records, std::nullopt, config, micro_exec(), 4);
  EXPECT_EQ(run_report_to_json(a).dump(), run_report_to_json(b).dump());
}

TEST(Pipeline, OnlineNeedsTwoTraces) {
  auto rec = question_with({trace_with("t0", "MATCH (n) RETURN n", 1.0)},
                           "MATCH (n) RETURN n");
  PipelineConfig config;
  config.inference_mode = InferenceMode::Online;
  EXPECT_THROW(run_pipeline({rec}, std::nullopt, config, micro_exec()),
               PipelineError);
}

TEST(Pipeline, OnlineTerminatesLowConfidenceTraces) {
  const std::string gold = "MATCH (p:Person) RETURN p.name";
  // warmup trace is confident; the junk trace's confidence collapses
  auto strong = trace_with("t0", gold, 3.0, 12);
  auto weak = trace_with("t1", "MATCH (p RETURN", 0.2, 12);
  auto strong2 = trace_with("t2", gold, 3.1, 12);
  auto rec = question_with({strong, weak, strong2}, gold);
  PipelineConfig config;
  config.inference_mode = InferenceMode::Online;
  config.window = 4;
  auto report = run_pipeline({rec}, std::nullopt, config, micro_exec());
  const auto& q = report.questions[0];
  EXPECT_EQ(q.funnel[1].removed_at, FunnelStage::Confidence);
  EXPECT_GT(report.tokens_saved, 0u);
  EXPECT_EQ(*q.prediction.query, gold);
}

TEST(Pipeline, SchemaFilterNeedsASchema) {
  auto rec = question_with({trace_with("t0", "MATCH (n) RETURN n", 1.0)},
                           "MATCH (n) RETURN n");
  rec.schema_text = "no triples here";
  PipelineConfig config;
  config.schema_filter = true;
  EXPECT_THROW(run_pipeline({rec}, std::nullopt, config, micro_exec()),
               PipelineError);
  // a global schema rescues records without one
  auto schema = parse_schema(fixture_schema_text());
  EXPECT_NO_THROW(run_pipeline({rec}, schema, config, micro_exec()));
}

TEST(Pipeline, BaseModeIgnoresConfidenceKnobs) {
  const std::string gold = "MATCH (p:Person) RETURN p.name";
  auto rec = question_with(
      {trace_with("t0", gold, 0.1), trace_with("t1", gold, 0.2)}, gold);
  PipelineConfig config;
  config.keep_ratio = 0.5;  // would drop a trace in offline mode
  auto report = run_pipeline({rec}, std::nullopt, config, micro_exec());
  EXPECT_EQ(report.questions[0].stages.after_confidence, 2u);
}

TEST(Pipeline, CosmeticNoiseCollapsesInVoting) {
  const std::string gold = "MATCH (p:Person) RETURN p.name";
  auto rec = question_with({trace_with("t0", "cypher: " + gold, 1.0),
                            trace_with("t1", "```cypher\n" + gold + "\n```", 1.1),
                            trace_with("t2", gold + ";", 0.9),
                            trace_with("t3", "MATCH (x) RETURN x", 5.0)},
                           gold);
  PipelineConfig config;
  auto report = run_pipeline({rec}, std::nullopt, config, micro_exec());
  EXPECT_EQ(report.questions[0].prediction.support_count, 3);
  EXPECT_EQ(*report.questions[0].prediction.query, gold);
}

TEST(Pipeline, InvalidConfigRejected) {
  PipelineConfig config;
  config.keep_ratio = 0.0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config.keep_ratio = 0.5;
  config.window = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
}
