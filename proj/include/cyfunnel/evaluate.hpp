#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyfunnel/micrograph.hpp"
#include "cyfunnel/rouge.hpp"
#include "cyfunnel/vote.hpp"

namespace cyfunnel {

using QueryExecutor = std::function<ExecutionOutcome(const std::string&)>;

enum class OutcomeClass { Success, RuntimeError, SyntaxError, Empty };

inline const char* to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::Success: return "success";
    case OutcomeClass::RuntimeError: return "runtime_error";
    case OutcomeClass::SyntaxError: return "syntax_error";
    case OutcomeClass::Empty: return "empty";
  }
  return "?";
}

struct EvalRow {
  std::string question_id;
  double rouge_l_lexical = 0.0;
  std::optional<double> rouge_l_exec;  // present only when both executions succeeded
  OutcomeClass outcome_class = OutcomeClass::Empty;
  std::string detail;  // executor message on error
  bool gold_failed = false;
  std::string gold_error;
};

// Joins the sorted canonical row serializations into one token stream for
// the execution-side ROUGE-L comparison.
inline std::vector<std::string> result_tokens(std::vector<std::string> rows) {
  std::sort(rows.begin(), rows.end());
  std::string joined;
  for (const auto& r : rows) {
    joined += r;
    joined += '\n';
  }
  return rouge_tokenize(joined);
}

inline EvalRow evaluate_question(const std::string& question_id,
                                 const Prediction& prediction,
                                 const std::string& gold_query,
                                 const QueryExecutor& executor) {
  EvalRow row;
  row.question_id = question_id;

  ExecutionOutcome gold_outcome = executor(gold_query);
  if (gold_outcome.status != ExecStatus::Success) {
    row.gold_failed = true;
    row.gold_error = gold_outcome.message;
  }

  if (prediction.empty()) {
    row.outcome_class = OutcomeClass::Empty;
    row.rouge_l_lexical = 0.0;
    return row;
  }

  const std::string& pred_text = *prediction.query;
  row.rouge_l_lexical = rouge_l_text(pred_text, gold_query);

  ExecutionOutcome pred_outcome = executor(pred_text);
  switch (pred_outcome.status) {
    case ExecStatus::SyntaxError:
      row.outcome_class = OutcomeClass::SyntaxError;
      row.detail = pred_outcome.message;
      break;
    case ExecStatus::RuntimeError:
      row.outcome_class = OutcomeClass::RuntimeError;
      row.detail = pred_outcome.message;
      break;
    case ExecStatus::Success:
      row.outcome_class = OutcomeClass::Success;
      if (!row.gold_failed)
        row.rouge_l_exec = rouge_l(result_tokens(pred_outcome.rows),
                                   result_tokens(gold_outcome.rows));
      break;
  }
  return row;
}

struct EvalReport {
  std::vector<EvalRow> rows;  // gold failures excluded
  std::vector<EvalRow> gold_failures;
  double mean_rouge_lexical = 0.0;
  double mean_rouge_exec = 0.0;
  double exec_success_ratio = 0.0;  // percent
  std::size_t success = 0, runtime_error = 0, syntax_error = 0, empty = 0;
  bool empty_dataset = false;

  std::size_t total() const { return rows.size(); }
};

// Half-up rounding to one decimal, for the percent display.
inline double round_half_up_1(double x) {
  return std::floor(x * 10.0 + 0.5) / 10.0;
}

// Aggregates rows into the report. Empty predictions count as zero in both
// ROUGE means; runtime/syntax failures are excluded from the exec mean since
// no execution result exists to compare.
inline EvalReport aggregate(const std::vector<EvalRow>& all_rows) {
  EvalReport report;
  for (const auto& row : all_rows) {
    if (row.gold_failed) {
      report.gold_failures.push_back(row);
      continue;
    }
    report.rows.push_back(row);
  }
  if (report.rows.empty()) {
    report.empty_dataset = true;
    return report;
  }
  double lex_sum = 0.0, exec_sum = 0.0;
  std::size_t exec_denominator = 0;
  for (const auto& row : report.rows) {
    lex_sum += row.rouge_l_lexical;
    switch (row.outcome_class) {
      case OutcomeClass::Success: ++report.success; break;
      case OutcomeClass::RuntimeError: ++report.runtime_error; break;
      case OutcomeClass::SyntaxError: ++report.syntax_error; break;
      case OutcomeClass::Empty: ++report.empty; break;
    }
    if (row.rouge_l_exec) {
      exec_sum += *row.rouge_l_exec;
      ++exec_denominator;
    } else if (row.outcome_class == OutcomeClass::Empty) {
      ++exec_denominator;  // empty predictions contribute zero
    }
  }
  const auto n = static_cast<double>(report.rows.size());
  report.mean_rouge_lexical = lex_sum / n;
  report.mean_rouge_exec =
      exec_denominator == 0 ? 0.0 : exec_sum / static_cast<double>(exec_denominator);
  report.exec_success_ratio =
      round_half_up_1(100.0 * static_cast<double>(report.success) / n);
  return report;
}

inline nlohmann::ordered_json eval_row_to_json(const EvalRow& row) {
  nlohmann::ordered_json j;
  j["question_id"] = row.question_id;
  j["outcome_class"] = to_string(row.outcome_class);
  j["rouge_l_lexical"] = row.rouge_l_lexical;
  if (row.rouge_l_exec) j["rouge_l_exec"] = *row.rouge_l_exec;
  if (!row.detail.empty()) j["detail"] = row.detail;
  if (row.gold_failed) j["gold_error"] = row.gold_error;
  return j;
}

inline nlohmann::ordered_json eval_report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["questions"] = report.total();
  j["mean_rouge_l_lexical"] = report.mean_rouge_lexical;
  j["mean_rouge_l_exec"] = report.mean_rouge_exec;
  j["exec_success_ratio"] = report.exec_success_ratio;
  j["counts"] = {{"success", report.success},
                 {"runtime_error", report.runtime_error},
                 {"syntax_error", report.syntax_error},
                 {"empty", report.empty}};
  if (report.empty_dataset) j["empty_dataset"] = true;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) rows.push_back(eval_row_to_json(row));
  auto& failures = j["gold_failures"] = nlohmann::ordered_json::array();
  for (const auto& row : report.gold_failures) failures.push_back(eval_row_to_json(row));
  return j;
}

}  // namespace cyfunnel
