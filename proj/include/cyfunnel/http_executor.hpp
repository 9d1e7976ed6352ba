#pragma once

#include <chrono>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "cyfunnel/micrograph.hpp"

namespace cyfunnel {

// Remote query endpoint speaking the transactional HTTP shape:
// POST <path> {"statements":[{"statement": <query>}]}.
struct HttpEndpoint {
  std::string host;           // e.g. "localhost"
  int port = 7474;
  std::string path = "/db/neo4j/tx/commit";
  std::string auth_header;    // verbatim Authorization value, optional
  int timeout_seconds = 30;
};

inline ExecutionOutcome execute_http(const HttpEndpoint& endpoint,
                                     const std::string& query) {
  ExecutionOutcome outcome;
  httplib::Client client(endpoint.host, endpoint.port);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  client.set_write_timeout(endpoint.timeout_seconds, 0);

  nlohmann::json body;
  body["statements"] = nlohmann::json::array();
  body["statements"].push_back({{"statement", query}});

  httplib::Headers headers;
  if (!endpoint.auth_header.empty())
    headers.emplace("Authorization", endpoint.auth_header);

  auto res = client.Post(endpoint.path, headers, body.dump(), "application/json");
  if (!res) {
    outcome.status = ExecStatus::RuntimeError;
    outcome.message = "transport failure: " + httplib::to_string(res.error());
    return outcome;
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    outcome.status = ExecStatus::RuntimeError;
    outcome.message = std::string("malformed endpoint response: ") + e.what();
    return outcome;
  }

  if (doc.contains("errors") && doc["errors"].is_array() && !doc["errors"].empty()) {
    const auto& err = doc["errors"].front();
    std::string code = err.value("code", "");
    std::string message = err.value("message", "");
    outcome.message = code.empty() ? message : code + ": " + message;
    outcome.status = code.find("SyntaxError") != std::string::npos
                         ? ExecStatus::SyntaxError
                         : ExecStatus::RuntimeError;
    return outcome;
  }

  if (res->status < 200 || res->status >= 300) {
    outcome.status = ExecStatus::RuntimeError;
    outcome.message = "HTTP status " + std::to_string(res->status);
    return outcome;
  }

  outcome.status = ExecStatus::Success;
  if (doc.contains("results") && doc["results"].is_array() &&
      !doc["results"].empty()) {
    const auto& first = doc["results"].front();
    if (first.contains("data")) {
      for (const auto& entry : first["data"]) {
        if (!entry.contains("row")) continue;
        // Re-serialize through the default (sorted-key) json type so rows
        // compare canonically with micro-engine output.
        nlohmann::json row = entry["row"];
        outcome.rows.push_back(row.dump());
      }
    }
  }
  return outcome;
}

}  // namespace cyfunnel
