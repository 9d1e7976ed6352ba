#pragma once

#include <iomanip>
#include <sstream>
#include <string>

#include "cyfunnel/evaluate.hpp"
#include "cyfunnel/trace.hpp"

namespace cyfunnel {

// CSV columns follow the two reporting tables: translation metrics first
// (lexical ROUGE-L, execution ROUGE-L, execution success ratio), then the
// error taxonomy (success %, runtime errors, syntax errors, empty).
inline std::string report_csv_header() {
  return "mode,grammar,schema_filter,rouge_l_lexical,rouge_l_exec,"
         "exec_succ_ratio,succ_pct,run_err,syn_err,empty";
}

inline std::string report_csv_row(const PipelineConfig& config,
                                  const EvalReport& eval) {
  std::ostringstream out;
  out << to_string(config.inference_mode) << ',' << to_string(config.grammar_variant)
      << ',' << (config.schema_filter ? "on" : "off") << ',' << std::fixed
      << std::setprecision(4) << eval.mean_rouge_lexical << ','
      << eval.mean_rouge_exec << ',' << std::setprecision(1)
      << eval.exec_success_ratio << ',' << eval.exec_success_ratio << ','
      << eval.runtime_error << ',' << eval.syntax_error << ',' << eval.empty;
  return out.str();
}

}  // namespace cyfunnel
