#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyfunnel/trace.hpp"

namespace cyfunnel {

// Thrown for unreadable files, malformed JSON lines and invalid records.
// Messages carry the 1-based line number.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj,
                                           const char* name, std::size_t line_no) {
  auto it = obj.find(name);
  if (it == obj.end())
    throw DatasetError("line " + std::to_string(line_no) +
                       ": missing required field \"" + name + "\"");
  return *it;
}

inline std::string schema_field_to_text(const nlohmann::json& schema,
                                        std::size_t line_no) {
  if (schema.is_string()) return schema.get<std::string>();
  if (schema.is_array()) {
    // Alternative schema form: [{"source": ..., "type": ..., "target": ...}, ...]
    std::string text;
    for (const auto& triple : schema) {
      if (!triple.is_object() || !triple.contains("source") ||
          !triple.contains("type") || !triple.contains("target"))
        throw DatasetError("line " + std::to_string(line_no) +
                           ": schema array entries need source/type/target");
      if (!text.empty()) text += '\n';
      text += "(:" + triple["source"].get<std::string>() + ")-[:" +
              triple["type"].get<std::string>() + "]->(:" +
              triple["target"].get<std::string>() + ")";
    }
    return text;
  }
  throw DatasetError("line " + std::to_string(line_no) +
                     ": field \"schema\" must be a string or an array of triples");
}

inline QuestionRecord parse_record(const nlohmann::json& obj, std::size_t line_no) {
  if (!obj.is_object())
    throw DatasetError("line " + std::to_string(line_no) + ": expected a JSON object");
  QuestionRecord rec;
  rec.question_id = require_field(obj, "question_id", line_no).get<std::string>();
  rec.question = require_field(obj, "question", line_no).get<std::string>();
  rec.gold_query = require_field(obj, "gold_query", line_no).get<std::string>();
  rec.schema_text = schema_field_to_text(require_field(obj, "schema", line_no), line_no);
  const auto& traces = require_field(obj, "traces", line_no);
  if (!traces.is_array())
    throw DatasetError("line " + std::to_string(line_no) + ": \"traces\" must be an array");
  for (const auto& t : traces) {
    CandidateTrace trace;
    trace.trace_id = require_field(t, "trace_id", line_no).get<std::string>();
    trace.raw_text = require_field(t, "text", line_no).get<std::string>();
    const auto& tokens = require_field(t, "tokens", line_no);
    for (const auto& tok : tokens) {
      TokenStep step;
      const auto& lps = require_field(tok, "topk_logprobs", line_no);
      for (const auto& v : lps) {
        if (!v.is_number() || !std::isfinite(v.get<double>()))
          throw DatasetError("line " + std::to_string(line_no) +
                             ": topk_logprobs entries must be finite numbers");
        step.topk_logprobs.push_back(v.get<double>());
      }
      trace.tokens.push_back(std::move(step));
    }
    if (auto problem = check_trace(trace))
      throw DatasetError("line " + std::to_string(line_no) + ": trace \"" +
                         trace.trace_id + "\": " + *problem);
    rec.traces.push_back(std::move(trace));
  }
  return rec;
}

}  // namespace detail

inline std::vector<QuestionRecord> load_dataset_stream(std::istream& in) {
  std::vector<QuestionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  std::vector<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t line_start = offset;
    offset += line.size() + 1;
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError("line " + std::to_string(line_no) + " (byte offset " +
                         std::to_string(line_start + (e.byte > 0 ? e.byte - 1 : 0)) +
                         "): JSON parse failure: " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    }
    QuestionRecord rec;
    try {
      rec = detail::parse_record(obj, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("line " + std::to_string(line_no) +
                         ": malformed field: " + e.what());
    }
    for (const auto& id : seen_ids)
      if (id == rec.question_id)
        throw DatasetError("line " + std::to_string(line_no) +
                           ": duplicate question_id \"" + rec.question_id + "\"");
    seen_ids.push_back(rec.question_id);
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<QuestionRecord> load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset file: " + path);
  return load_dataset_stream(in);
}

inline nlohmann::ordered_json record_to_json(const QuestionRecord& rec) {
  nlohmann::ordered_json obj;
  obj["question_id"] = rec.question_id;
  obj["question"] = rec.question;
  obj["gold_query"] = rec.gold_query;
  obj["schema"] = rec.schema_text;
  auto& traces = obj["traces"] = nlohmann::ordered_json::array();
  for (const auto& t : rec.traces) {
    nlohmann::ordered_json jt;
    jt["trace_id"] = t.trace_id;
    jt["text"] = t.raw_text;
    auto& toks = jt["tokens"] = nlohmann::ordered_json::array();
    for (const auto& step : t.tokens)
      toks.push_back({{"topk_logprobs", step.topk_logprobs}});
    traces.push_back(std::move(jt));
  }
  return obj;
}

inline void save_dataset_stream(const std::vector<QuestionRecord>& records,
                                std::ostream& out) {
  for (const auto& rec : records) out << record_to_json(rec).dump() << '\n';
}

inline void save_dataset(const std::vector<QuestionRecord>& records,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot open output file: " + path);
  save_dataset_stream(records, out);
}

}  // namespace cyfunnel
