#pragma once

#include <atomic>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cyfunnel/confidence.hpp"
#include "cyfunnel/evaluate.hpp"
#include "cyfunnel/funnel.hpp"
#include "cyfunnel/postprocess.hpp"
#include "cyfunnel/schema.hpp"
#include "cyfunnel/trace.hpp"
#include "cyfunnel/vote.hpp"

namespace cyfunnel {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageCounts {
  std::size_t input = 0;
  std::size_t after_confidence = 0;
  std::size_t after_grammar = 0;
  std::size_t after_schema = 0;
};

struct QuestionResult {
  std::string question_id;
  Prediction prediction;
  std::vector<FunnelRecord> funnel;  // one per input trace, original order
  StageCounts stages;
  EvalRow eval;
  std::size_t tokens_saved = 0;
};

struct RunReport {
  static constexpr int version = 1;
  PipelineConfig config;
  EvalReport eval;
  std::vector<QuestionResult> questions;
  StageCounts stage_totals;
  std::size_t tokens_saved = 0;
};

namespace detail {

// Applies the full funnel for one question and evaluates the prediction.
inline QuestionResult process_question(const QuestionRecord& record,
                                       const GraphSchema* schema,
                                       const PipelineConfig& config,
                                       const QueryExecutor& executor) {
  QuestionResult result;
  result.question_id = record.question_id;

  std::vector<FunnelCandidate> candidates;
  candidates.reserve(record.traces.size());
  for (const auto& trace : record.traces) {
    FunnelCandidate c;
    c.trace_id = trace.trace_id;
    c.text = postprocess_raw(trace.raw_text);
    c.confidence =
        TraceConfidence::from_trace(trace, static_cast<std::size_t>(config.window));
    c.token_count = trace.tokens.size();
    candidates.push_back(std::move(c));
  }
  result.stages.input = candidates.size();

  std::vector<FunnelRecord> removed;

  // 1) confidence stage
  std::vector<FunnelCandidate> pool;
  switch (config.inference_mode) {
    case InferenceMode::Base:
      pool = candidates;
      break;
    case InferenceMode::Offline: {
      std::vector<double> scores;
      scores.reserve(candidates.size());
      for (const auto& c : candidates) scores.push_back(c.confidence.lowest_group);
      auto kept = offline_filter_indices(scores, config.keep_ratio);
      std::size_t next_kept = 0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (next_kept < kept.size() && kept[next_kept] == i) {
          pool.push_back(candidates[i]);
          ++next_kept;
        } else {
          removed.push_back(make_record(candidates[i], FunnelStage::Confidence,
                                        "lowest group confidence below keep-ratio rank"));
        }
      }
      break;
    }
    case InferenceMode::Online: {
      std::size_t warmup =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(
                                       0.1 * static_cast<double>(candidates.size()))));
      std::vector<double> warmup_scores;
      for (std::size_t i = 0; i < warmup && i < candidates.size(); ++i)
        warmup_scores.push_back(candidates[i].confidence.lowest_group);
      double threshold = calibrate_threshold(warmup_scores, config.keep_ratio);
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i < warmup) {
          pool.push_back(candidates[i]);  // warmup traces are fully decoded
          continue;
        }
        const auto& c = candidates[i];
        if (c.confidence.token_confidences.empty()) {
          removed.push_back(
              make_record(c, FunnelStage::Confidence, "empty generation"));
          continue;
        }
        OnlineOutcome sim = online_simulate(c.confidence.token_confidences,
                                            static_cast<std::size_t>(config.window),
                                            threshold);
        if (sim.kept) {
          pool.push_back(c);
        } else {
          FunnelRecord rec = make_record(
              c, FunnelStage::Confidence,
              "terminated at token " + std::to_string(sim.terminated_at) +
                  " (group confidence below threshold)");
          rec.tokens_saved = sim.tokens_saved;
          result.tokens_saved += sim.tokens_saved;
          removed.push_back(std::move(rec));
        }
      }
      break;
    }
  }
  result.stages.after_confidence = pool.size();

  // 2) grammar stage
  pool = grammar_filter(pool, config.grammar_variant, removed);
  result.stages.after_grammar = pool.size();

  // 3) schema stage
  if (config.schema_filter && schema) {
    SchemaCheckOptions opts;
    opts.label_aware = config.schema_label_aware;
    opts.reject_unknown_types = config.schema_reject_unknown_types;
    pool = schema_filter(pool, *schema, config.grammar_variant, opts, removed);
  }
  result.stages.after_schema = pool.size();

  // 4) vote
  std::vector<VoteCandidate> voters;
  voters.reserve(pool.size());
  for (const auto& c : pool)
    voters.push_back({c.trace_id, c.text, c.confidence.mean_confidence});
  result.prediction = vote(voters, config.vote_mode);

  // 5) evaluate
  result.eval = evaluate_question(record.question_id, result.prediction,
                                  record.gold_query, executor);

  // funnel records in original trace order, survivors included
  std::unordered_map<std::string, const FunnelRecord*> removed_by_id;
  for (const auto& r : removed) removed_by_id[r.trace_id] = &r;
  std::unordered_map<std::string, const FunnelCandidate*> survivors_by_id;
  for (const auto& c : pool) survivors_by_id[c.trace_id] = &c;
  for (const auto& c : candidates) {
    auto it = removed_by_id.find(c.trace_id);
    if (it != removed_by_id.end()) {
      result.funnel.push_back(*it->second);
    } else {
      result.funnel.push_back(make_record(c, FunnelStage::Survived, ""));
    }
  }
  return result;
}

}  // namespace detail

// Runs the sequential funnel over all questions. `global_schema`, when given,
// overrides the per-record schema text. Deterministic for fixed inputs and
// config; question-level work is pure so the worker pool size never changes
// the report.
inline RunReport run_pipeline(const std::vector<QuestionRecord>& records,
                              const std::optional<GraphSchema>& global_schema,
                              const PipelineConfig& config,
                              const QueryExecutor& executor, int threads = 1) {
  config.validate();
  if (config.inference_mode == InferenceMode::Online) {
    for (const auto& rec : records)
      if (rec.traces.size() < 2)
        throw PipelineError("online mode needs at least 2 traces per question; \"" +
                            rec.question_id + "\" has " +
                            std::to_string(rec.traces.size()));
  }

  // Parse every distinct schema text up front; the map is read-only while
  // the workers run.
  std::unordered_map<std::string, std::shared_ptr<GraphSchema>> schema_cache;
  std::vector<const GraphSchema*> schemas(records.size(), nullptr);
  if (config.schema_filter) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (global_schema) {
        schemas[i] = &*global_schema;
        continue;
      }
      auto it = schema_cache.find(records[i].schema_text);
      if (it == schema_cache.end()) {
        try {
          auto parsed = std::make_shared<GraphSchema>(parse_schema(records[i].schema_text));
          it = schema_cache.emplace(records[i].schema_text, std::move(parsed)).first;
        } catch (const SchemaError& e) {
          throw PipelineError("schema filter is enabled but question \"" +
                              records[i].question_id +
                              "\" has no usable schema: " + e.what());
        }
      }
      schemas[i] = it->second.get();
    }
  }

  RunReport report;
  report.config = config;
  report.questions.resize(records.size());

  auto worker_count = static_cast<std::size_t>(std::max(threads, 1));
  worker_count = std::min(worker_count, records.size() ? records.size() : 1);
  if (worker_count <= 1) {
    for (std::size_t i = 0; i < records.size(); ++i)
      report.questions[i] =
          detail::process_question(records[i], schemas[i], config, executor);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
      workers.emplace_back([&, w] {
        try {
          while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= records.size()) break;
            report.questions[i] =
                detail::process_question(records[i], schemas[i], config, executor);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<EvalRow> rows;
  rows.reserve(report.questions.size());
  for (const auto& q : report.questions) {
    rows.push_back(q.eval);
    report.stage_totals.input += q.stages.input;
    report.stage_totals.after_confidence += q.stages.after_confidence;
    report.stage_totals.after_grammar += q.stages.after_grammar;
    report.stage_totals.after_schema += q.stages.after_schema;
    report.tokens_saved += q.tokens_saved;
  }
  report.eval = aggregate(rows);
  return report;
}

// --- JSON serialization ------------------------------------------------------

inline nlohmann::ordered_json config_to_json(const PipelineConfig& config) {
  nlohmann::ordered_json j;
  j["inference_mode"] = to_string(config.inference_mode);
  j["grammar_variant"] = to_string(config.grammar_variant);
  j["schema_filter"] = config.schema_filter;
  j["keep_ratio"] = config.keep_ratio;
  j["window"] = config.window;
  j["vote_mode"] = to_string(config.vote_mode);
  j["seed"] = config.seed;
  j["schema_label_aware"] = config.schema_label_aware;
  j["schema_reject_unknown_types"] = config.schema_reject_unknown_types;
  if (config.profile) {
    j["sampling_profile"] = {{"name", config.profile->name},
                             {"temperature", config.profile->temperature},
                             {"top_p", config.profile->top_p},
                             {"top_k", config.profile->top_k}};
  }
  return j;
}

inline nlohmann::ordered_json stage_counts_to_json(const StageCounts& s) {
  return {{"input", s.input},
          {"after_confidence", s.after_confidence},
          {"after_grammar", s.after_grammar},
          {"after_schema", s.after_schema}};
}

inline nlohmann::ordered_json run_report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["report_version"] = RunReport::version;
  j["config"] = config_to_json(report.config);
  j["eval"] = eval_report_to_json(report.eval);
  j["stage_totals"] = stage_counts_to_json(report.stage_totals);
  j["tokens_saved"] = report.tokens_saved;
  auto& questions = j["questions"] = nlohmann::ordered_json::array();
  for (const auto& q : report.questions) {
    nlohmann::ordered_json jq;
    jq["question_id"] = q.question_id;
    if (q.prediction.empty()) {
      jq["prediction"] = nullptr;
    } else {
      jq["prediction"] = *q.prediction.query;
    }
    jq["support_count"] = q.prediction.support_count;
    jq["total_confidence"] = q.prediction.total_confidence;
    jq["contributors"] = q.prediction.contributors;
    jq["stage_counts"] = stage_counts_to_json(q.stages);
    jq["tokens_saved"] = q.tokens_saved;
    auto& funnel = jq["funnel"] = nlohmann::ordered_json::array();
    for (const auto& rec : q.funnel) {
      nlohmann::ordered_json jr;
      jr["trace_id"] = rec.trace_id;
      jr["removed_at"] = to_string(rec.removed_at);
      jr["reason"] = rec.reason;
      jr["token_count"] = rec.token_count;
      jr["lowest_group"] = rec.lowest_group;
      jr["mean_confidence"] = rec.mean_confidence;
      if (rec.tokens_saved > 0) jr["tokens_saved"] = rec.tokens_saved;
      funnel.push_back(std::move(jr));
    }
    questions.push_back(std::move(jq));
  }
  return j;
}

}  // namespace cyfunnel
