#pragma once

#include <string>
#include <vector>

#include "cyfunnel/confidence.hpp"
#include "cyfunnel/naive_check.hpp"
#include "cyfunnel/parser.hpp"
#include "cyfunnel/schema.hpp"
#include "cyfunnel/trace.hpp"

namespace cyfunnel {

enum class FunnelStage { Confidence, Grammar, Schema, Survived };

inline const char* to_string(FunnelStage s) {
  switch (s) {
    case FunnelStage::Confidence: return "confidence";
    case FunnelStage::Grammar: return "grammar";
    case FunnelStage::Schema: return "schema";
    case FunnelStage::Survived: return "survived";
  }
  return "?";
}

// Audit trail entry: where a trace left the funnel and why, plus the
// confidence statistics it carried.
struct FunnelRecord {
  std::string trace_id;
  FunnelStage removed_at = FunnelStage::Survived;
  std::string reason;
  std::size_t token_count = 0;
  double lowest_group = 0.0;
  double mean_confidence = 0.0;
  std::size_t tokens_saved = 0;  // online mode, terminated traces only
};

// A candidate flowing through the funnel stages.
struct FunnelCandidate {
  std::string trace_id;
  std::string text;  // post-processed
  TraceConfidence confidence;
  std::size_t token_count = 0;
};

inline FunnelRecord make_record(const FunnelCandidate& c, FunnelStage stage,
                                std::string reason) {
  FunnelRecord rec;
  rec.trace_id = c.trace_id;
  rec.removed_at = stage;
  rec.reason = std::move(reason);
  rec.token_count = c.token_count;
  rec.lowest_group = c.confidence.lowest_group;
  rec.mean_confidence = c.confidence.mean_confidence;
  return rec;
}

inline std::string format_diagnostic(const Diagnostic& d) {
  return "offset " + std::to_string(d.pos.offset) + ": " + d.message;
}

// Drops candidates failing the selected grammar validator; removals are
// appended to `records` with the first diagnostic.
inline std::vector<FunnelCandidate> grammar_filter(
    const std::vector<FunnelCandidate>& candidates, GrammarVariant variant,
    std::vector<FunnelRecord>& records) {
  if (variant == GrammarVariant::None) return candidates;
  std::vector<FunnelCandidate> survivors;
  for (const auto& c : candidates) {
    SyntaxVerdict verdict = variant == GrammarVariant::Naive
                                ? naive_validate(c.text)
                                : formal_validate(c.text);
    if (verdict.accepted) {
      survivors.push_back(c);
    } else {
      records.push_back(
          make_record(c, FunnelStage::Grammar,
                      verdict.diagnostics.empty()
                          ? "rejected"
                          : format_diagnostic(verdict.diagnostics.front())));
    }
  }
  return survivors;
}

// Extracts relationship usages for the schema check. The formal variant uses
// the parsed AST; otherwise a best-effort token scan (lower fidelity).
inline std::vector<RelUsage> usages_for_candidate(const std::string& text,
                                                  GrammarVariant variant) {
  if (variant == GrammarVariant::Formal) {
    ParseResult parsed = parse(text);
    if (parsed.ast) return extract_usages(*parsed.ast);
  }
  return extract_usages_tokens(tokenize(text).tokens);
}

// Drops candidates whose relationship usage contradicts the schema.
inline std::vector<FunnelCandidate> schema_filter(
    const std::vector<FunnelCandidate>& candidates, const GraphSchema& schema,
    GrammarVariant variant, const SchemaCheckOptions& opts,
    std::vector<FunnelRecord>& records) {
  std::vector<FunnelCandidate> survivors;
  for (const auto& c : candidates) {
    auto usages = usages_for_candidate(c.text, variant);
    SyntaxVerdict verdict = schema_validate(usages, schema, opts);
    if (verdict.accepted) {
      survivors.push_back(c);
    } else {
      records.push_back(make_record(c, FunnelStage::Schema,
                                    verdict.diagnostics.front().message));
    }
  }
  return survivors;
}

}  // namespace cyfunnel
