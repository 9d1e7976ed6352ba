// Command-line front end for the candidate-filtering funnel: run the
// pipeline, validate queries, generate synthetic datasets, evaluate
// prediction files and sweep configurations.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cyfunnel/dataset.hpp"
#include "cyfunnel/evaluate.hpp"
#include "cyfunnel/http_executor.hpp"
#include "cyfunnel/micrograph.hpp"
#include "cyfunnel/naive_check.hpp"
#include "cyfunnel/parser.hpp"
#include "cyfunnel/pipeline.hpp"
#include "cyfunnel/report_csv.hpp"
#include "cyfunnel/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct BackendOptions {
  std::string graph_path;
  std::string endpoint_host;
  int endpoint_port = 7474;
  std::string endpoint_path = "/db/neo4j/tx/commit";
  std::string auth_header;
  int http_timeout = 30;
};

void add_backend_options(CLI::App* cmd, BackendOptions& opts) {
  cmd->add_option("--graph", opts.graph_path, "graph fixture JSON for the micro engine");
  cmd->add_option("--endpoint-host", opts.endpoint_host,
                  "remote HTTP endpoint host (overrides --graph)")
      ->envname("CYFUNNEL_ENDPOINT_HOST");
  cmd->add_option("--endpoint-port", opts.endpoint_port, "remote endpoint port")
      ->envname("CYFUNNEL_ENDPOINT_PORT");
  cmd->add_option("--endpoint-path", opts.endpoint_path, "remote endpoint path")
      ->envname("CYFUNNEL_ENDPOINT_PATH");
  cmd->add_option("--auth", opts.auth_header,
                  "verbatim Authorization header for the endpoint")
      ->envname("CYFUNNEL_AUTH");
  cmd->add_option("--http-timeout", opts.http_timeout, "endpoint timeout in seconds");
}

// Builds the query executor; the micro engine needs the graph kept alive.
cyfunnel::QueryExecutor make_executor(const BackendOptions& opts,
                                      std::shared_ptr<cyfunnel::MicroGraph>& graph_out) {
  if (!opts.endpoint_host.empty()) {
    cyfunnel::HttpEndpoint endpoint;
    endpoint.host = opts.endpoint_host;
    endpoint.port = opts.endpoint_port;
    endpoint.path = opts.endpoint_path;
    endpoint.auth_header = opts.auth_header;
    endpoint.timeout_seconds = opts.http_timeout;
    return [endpoint](const std::string& q) { return execute_http(endpoint, q); };
  }
  if (opts.graph_path.empty())
    throw cyfunnel::PipelineError("no backend: pass --graph or --endpoint-host");
  graph_out = std::make_shared<cyfunnel::MicroGraph>(
      cyfunnel::MicroGraph::load_file(opts.graph_path));
  auto graph = graph_out;
  return [graph](const std::string& q) { return execute_micro(*graph, q); };
}

struct ConfigOptions {
  std::string mode = "base";
  std::string grammar = "none";
  std::string schema_filter = "off";
  double keep_ratio = 0.9;
  int window = 32;
  std::string vote = "majority";
  std::uint64_t seed = 0;
  std::string profile;
  bool type_only_schema = false;
  bool strict_unknown_types = false;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
  cmd->add_option("--mode", opts.mode, "inference mode")
      ->check(CLI::IsMember({"base", "offline", "online"}));
  cmd->add_option("--grammar", opts.grammar, "grammar filter variant")
      ->check(CLI::IsMember({"none", "naive", "formal"}));
  cmd->add_option("--schema-filter", opts.schema_filter, "schema filter on/off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--keep-ratio", opts.keep_ratio,
                  "fraction of candidates the confidence stage keeps");
  cmd->add_option("--window", opts.window, "group confidence window size");
  cmd->add_option("--vote", opts.vote, "vote mode")
      ->check(CLI::IsMember({"majority", "weighted"}));
  cmd->add_option("--seed", opts.seed, "run seed (echoed into the report)");
  cmd->add_option("--profile", opts.profile, "sampling profile to record")
      ->check(CLI::IsMember({"moderately-diverse", "very-diverse"}));
  cmd->add_flag("--type-only-schema", opts.type_only_schema,
                "schema check rejects only demonstrated direction flips");
  cmd->add_flag("--strict-unknown-types", opts.strict_unknown_types,
                "schema check rejects relationship types absent from the schema");
}

cyfunnel::PipelineConfig to_pipeline_config(const ConfigOptions& opts) {
  cyfunnel::PipelineConfig config;
  config.inference_mode = opts.mode == "base"      ? cyfunnel::InferenceMode::Base
                          : opts.mode == "offline" ? cyfunnel::InferenceMode::Offline
                                                   : cyfunnel::InferenceMode::Online;
  config.grammar_variant = opts.grammar == "none"    ? cyfunnel::GrammarVariant::None
                           : opts.grammar == "naive" ? cyfunnel::GrammarVariant::Naive
                                                     : cyfunnel::GrammarVariant::Formal;
  config.schema_filter = opts.schema_filter == "on";
  config.keep_ratio = opts.keep_ratio;
  config.window = opts.window;
  config.vote_mode = opts.vote == "majority"
                         ? cyfunnel::VoteMode::Majority
                         : cyfunnel::VoteMode::ConfidenceWeighted;
  config.seed = opts.seed;
  config.schema_label_aware = !opts.type_only_schema;
  config.schema_reject_unknown_types = opts.strict_unknown_types;
  if (opts.profile == "moderately-diverse")
    config.profile = cyfunnel::SamplingProfile::moderately_diverse();
  else if (opts.profile == "very-diverse")
    config.profile = cyfunnel::SamplingProfile::very_diverse();
  return config;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cyfunnel::PipelineError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<cyfunnel::GraphSchema> load_schema_option(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return cyfunnel::parse_schema(read_text_file(path));
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cyfunnel::PipelineError("cannot open output file: " + path);
  out << content;
}

void print_report_summary(const cyfunnel::RunReport& report) {
  const auto& e = report.eval;
  std::cout << "questions:          " << e.total() << "\n"
            << "rouge_l_lexical:    " << e.mean_rouge_lexical << "\n"
            << "rouge_l_exec:       " << e.mean_rouge_exec << "\n"
            << "exec_succ_ratio:    " << e.exec_success_ratio << "%\n"
            << "success:            " << e.success << "\n"
            << "runtime_errors:     " << e.runtime_error << "\n"
            << "syntax_errors:      " << e.syntax_error << "\n"
            << "empty:              " << e.empty << "\n"
            << "tokens_saved:       " << report.tokens_saved << "\n";
  if (!e.gold_failures.empty())
    std::cout << "gold_failures:      " << e.gold_failures.size()
              << " (excluded from aggregates)\n";
}

int cmd_run(const std::string& dataset_path, const std::string& schema_path,
            const BackendOptions& backend, const ConfigOptions& config_opts,
            const std::string& out_path, const std::string& csv_path, int threads) {
  auto records = cyfunnel::load_dataset(dataset_path);
  auto schema = load_schema_option(schema_path);
  std::shared_ptr<cyfunnel::MicroGraph> graph;
  auto executor = make_executor(backend, graph);
  auto config = to_pipeline_config(config_opts);
  auto report = cyfunnel::run_pipeline(records, schema, config, executor, threads);
  if (!out_path.empty())
    write_file(out_path, cyfunnel::run_report_to_json(report).dump(2) + "\n");
  if (!csv_path.empty())
    write_file(csv_path, cyfunnel::report_csv_header() + "\n" +
                             cyfunnel::report_csv_row(config, report.eval) + "\n");
  print_report_summary(report);
  return kExitOk;
}

int cmd_validate(const std::string& variant, const std::vector<std::string>& files) {
  auto check = [&](const std::string& text) {
    cyfunnel::SyntaxVerdict verdict = variant == "naive"
                                          ? cyfunnel::naive_validate(text)
                                          : cyfunnel::formal_validate(text);
    if (verdict.accepted) {
      std::cout << "ACCEPT\t" << text << "\n";
    } else {
      const auto& d = verdict.diagnostics.front();
      std::cout << "REJECT\t" << d.pos.line << ":" << d.pos.column << " "
                << d.message << "\t" << text << "\n";
    }
  };
  auto check_stream = [&](std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      check(line);
    }
  };
  if (files.empty()) {
    check_stream(std::cin);
  } else {
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      if (!in) {
        std::cerr << "cannot open " << f << "\n";
        return kExitData;
      }
      check_stream(in);
    }
  }
  return kExitOk;
}

int cmd_synth(const std::string& gold_pool_path, const std::string& graph_path,
              const std::string& schema_path, const std::string& out_path,
              const cyfunnel::SynthConfig& config) {
  std::vector<std::string> golds;
  {
    std::ifstream in(gold_pool_path, std::ios::binary);
    if (!in) throw cyfunnel::SynthError("cannot open gold pool: " + gold_pool_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      golds.push_back(line);
    }
  }
  auto graph = cyfunnel::MicroGraph::load_file(graph_path);
  std::string schema_text = read_text_file(schema_path);
  auto records = cyfunnel::generate(golds, graph, schema_text, config);
  cyfunnel::save_dataset(records, out_path);
  std::cout << "wrote " << records.size() << " questions x " << config.n_traces
            << " traces to " << out_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& predictions_path, const std::string& dataset_path,
             const BackendOptions& backend, const std::string& out_path) {
  auto records = cyfunnel::load_dataset(dataset_path);
  std::map<std::string, std::optional<std::string>> predictions;
  {
    std::ifstream in(predictions_path, std::ios::binary);
    if (!in)
      throw cyfunnel::DatasetError("cannot open predictions file: " + predictions_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw cyfunnel::DatasetError("predictions line " + std::to_string(line_no) +
                                     ": " + e.what());
      }
      if (!obj.contains("question_id"))
        throw cyfunnel::DatasetError("predictions line " + std::to_string(line_no) +
                                     ": missing \"question_id\"");
      std::optional<std::string> text;
      if (obj.contains("prediction") && !obj["prediction"].is_null())
        text = obj["prediction"].get<std::string>();
      predictions[obj["question_id"].get<std::string>()] = text;
    }
  }
  std::shared_ptr<cyfunnel::MicroGraph> graph;
  auto executor = make_executor(backend, graph);

  std::vector<cyfunnel::EvalRow> rows;
  for (const auto& rec : records) {
    cyfunnel::Prediction pred;
    auto it = predictions.find(rec.question_id);
    if (it != predictions.end() && it->second) {
      pred.query = cyfunnel::postprocess_raw(*it->second);
      pred.support_count = 1;
    }
    rows.push_back(cyfunnel::evaluate_question(rec.question_id, pred, rec.gold_query,
                                               executor));
  }
  auto report = cyfunnel::aggregate(rows);
  if (!out_path.empty())
    write_file(out_path, cyfunnel::eval_report_to_json(report).dump(2) + "\n");
  std::cout << "questions: " << report.total()
            << "  rouge_l_lexical: " << report.mean_rouge_lexical
            << "  rouge_l_exec: " << report.mean_rouge_exec
            << "  succ: " << report.exec_success_ratio << "%"
            << "  counts(s/r/y/e): " << report.success << "/" << report.runtime_error
            << "/" << report.syntax_error << "/" << report.empty << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& dataset_path, const std::string& schema_path,
              const BackendOptions& backend, const ConfigOptions& base_opts,
              const std::string& out_path, int threads) {
  auto records = cyfunnel::load_dataset(dataset_path);
  auto schema = load_schema_option(schema_path);
  std::shared_ptr<cyfunnel::MicroGraph> graph;
  auto executor = make_executor(backend, graph);

  struct Cell {
    const char* mode;
    const char* grammar;
    const char* schema_filter;
  };
  // Base first, then per mode: confidence only, +grammar (naive/formal),
  // +schema on top of each grammar variant.
  std::vector<Cell> cells = {{"base", "none", "off"}};
  for (const char* mode : {"offline", "online"}) {
    cells.push_back({mode, "none", "off"});
    cells.push_back({mode, "naive", "off"});
    cells.push_back({mode, "formal", "off"});
    cells.push_back({mode, "naive", "on"});
    cells.push_back({mode, "formal", "on"});
  }

  std::ostringstream csv;
  csv << cyfunnel::report_csv_header() << "\n";
  for (const auto& cell : cells) {
    ConfigOptions opts = base_opts;
    opts.mode = cell.mode;
    opts.grammar = cell.grammar;
    opts.schema_filter = cell.schema_filter;
    auto config = to_pipeline_config(opts);
    auto report = cyfunnel::run_pipeline(records, schema, config, executor, threads);
    csv << cyfunnel::report_csv_row(config, report.eval) << "\n";
    std::cout << cell.mode << "/" << cell.grammar << "/schema-" << cell.schema_filter
              << ": succ " << report.eval.exec_success_ratio << "% syn "
              << report.eval.syntax_error << " empty " << report.eval.empty << "\n";
  }
  if (!out_path.empty()) write_file(out_path, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filtering funnel for generated Cypher candidates"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run the filtering funnel over a dataset");
  run->set_config("--config", "", "flat key=value config file; CLI flags override");
  std::string run_dataset, run_schema, run_out, run_csv;
  int run_threads = 1;
  BackendOptions run_backend;
  ConfigOptions run_config;
  run->add_option("--dataset", run_dataset, "dataset JSONL")->required();
  run->add_option("--schema", run_schema, "schema text file overriding per-question schemas");
  run->add_option("--out", run_out, "write the full run report JSON here");
  run->add_option("--csv", run_csv, "write a one-row metrics CSV here");
  run->add_option("--threads", run_threads, "worker threads");
  add_backend_options(run, run_backend);
  add_config_options(run, run_config);

  // validate
  auto* validate = app.add_subcommand("validate", "grammar-check queries (one per line)");
  std::string validate_variant = "formal";
  std::vector<std::string> validate_files;
  validate->add_option("--variant", validate_variant, "validator to apply")
      ->check(CLI::IsMember({"naive", "formal"}));
  validate->add_option("files", validate_files, "query files; stdin when omitted");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_gold, synth_graph, synth_schema, synth_out;
  cyfunnel::SynthConfig synth_config;
  synth->add_option("--gold-pool", synth_gold, "gold queries, one per line")->required();
  synth->add_option("--graph", synth_graph, "fixture graph JSON")->required();
  synth->add_option("--schema", synth_schema, "fixture schema text")->required();
  synth->add_option("--out", synth_out, "output dataset JSONL")->required();
  synth->add_option("--questions", synth_config.n_questions, "number of questions");
  synth->add_option("--traces", synth_config.n_traces, "traces per question");
  synth->add_option("--p-syntax", synth_config.p_syntax_error, "syntax mutation probability");
  synth->add_option("--p-direction", synth_config.p_direction_error,
                    "direction flip probability");
  synth->add_option("--p-label", synth_config.p_label_error, "label swap probability");
  synth->add_option("--confidence-gap", synth_config.confidence_gap,
                    "mean confidence gap between clean and corrupted traces");
  synth->add_option("--seed", synth_config.seed, "generation seed");

  // eval
  auto* eval = app.add_subcommand("eval", "score a predictions file against golds");
  std::string eval_predictions, eval_dataset, eval_out;
  BackendOptions eval_backend;
  eval->add_option("--predictions", eval_predictions,
                   "JSONL: {\"question_id\":..., \"prediction\":...}")
      ->required();
  eval->add_option("--dataset", eval_dataset, "dataset JSONL with gold queries")
      ->required();
  eval->add_option("--out", eval_out, "write the eval report JSON here");
  add_backend_options(eval, eval_backend);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run the mode x filter grid, emit CSV");
  std::string sweep_dataset, sweep_schema, sweep_out;
  int sweep_threads = 1;
  BackendOptions sweep_backend;
  ConfigOptions sweep_config;
  sweep->add_option("--dataset", sweep_dataset, "dataset JSONL")->required();
  sweep->add_option("--schema", sweep_schema, "schema text file");
  sweep->add_option("--out", sweep_out, "output CSV")->required();
  sweep->add_option("--threads", sweep_threads, "worker threads");
  sweep->add_option("--keep-ratio", sweep_config.keep_ratio, "confidence keep ratio");
  sweep->add_option("--window", sweep_config.window, "group confidence window");
  sweep->add_option("--seed", sweep_config.seed, "run seed");
  add_backend_options(sweep, sweep_backend);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed())
      return cmd_run(run_dataset, run_schema, run_backend, run_config, run_out,
                     run_csv, run_threads);
    if (validate->parsed()) return cmd_validate(validate_variant, validate_files);
    if (synth->parsed())
      return cmd_synth(synth_gold, synth_graph, synth_schema, synth_out, synth_config);
    if (eval->parsed())
      return cmd_eval(eval_predictions, eval_dataset, eval_backend, eval_out);
    if (sweep->parsed())
      return cmd_sweep(sweep_dataset, sweep_schema, sweep_backend, sweep_config,
                       sweep_out, sweep_threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
