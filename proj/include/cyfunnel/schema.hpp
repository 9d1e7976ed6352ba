#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cyfunnel/ast.hpp"
#include "cyfunnel/diagnostics.hpp"
#include "cyfunnel/lexer.hpp"

namespace cyfunnel {

struct SchemaTriple {
  std::string source_label;
  std::string rel_type;
  std::string target_label;

  auto operator<=>(const SchemaTriple&) const = default;
};

// Directed (source, type, target) facts plus a per-type index.
struct GraphSchema {
  std::set<SchemaTriple> triples;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> rel_type_index;
  std::vector<std::string> warnings;  // unparsable input lines

  bool empty() const { return triples.empty(); }

  bool has_type(const std::string& rel_type) const {
    return rel_type_index.count(rel_type) > 0;
  }

  void insert(SchemaTriple triple) {
    if (triples.insert(triple).second)
      rel_type_index[triple.rel_type].emplace_back(triple.source_label,
                                                   triple.target_label);
  }
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Matches one `(:A)-[:R]->(:B)` line, whitespace-tolerant, backticks allowed.
inline bool parse_schema_line(std::string_view line, SchemaTriple& out) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
      ++i;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (i < line.size() && line[i] == c) {
      ++i;
      return true;
    }
    return false;
  };
  auto read_name = [&](std::string& out_name) {
    skip_ws();
    if (i >= line.size()) return false;
    if (line[i] == '`') {
      std::size_t start = i++;
      while (i < line.size()) {
        if (line[i] == '`') {
          if (i + 1 < line.size() && line[i + 1] == '`') {
            i += 2;
            continue;
          }
          ++i;
          out_name = unquote_name(line.substr(start, i - start));
          return true;
        }
        ++i;
      }
      return false;
    }
    std::size_t start = i;
    while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) ||
                               line[i] == '_' ||
                               static_cast<unsigned char>(line[i]) >= 0x80))
      ++i;
    if (i == start) return false;
    out_name = std::string(line.substr(start, i - start));
    return true;
  };

  if (!expect('(') || !expect(':')) return false;
  if (!read_name(out.source_label)) return false;
  if (!expect(')') || !expect('-') || !expect('[') || !expect(':')) return false;
  if (!read_name(out.rel_type)) return false;
  if (!expect(']') || !expect('-') || !expect('>') || !expect('(') || !expect(':'))
    return false;
  if (!read_name(out.target_label)) return false;
  if (!expect(')')) return false;
  skip_ws();
  return i == line.size();
}

}  // namespace detail

// Parses newline-separated schema triples. Lines that do not match the
// triple shape land in .warnings; zero parsable lines is an error.
inline GraphSchema parse_schema(std::string_view schema_text) {
  GraphSchema schema;
  std::size_t start = 0;
  while (start <= schema_text.size()) {
    std::size_t end = schema_text.find('\n', start);
    if (end == std::string_view::npos) end = schema_text.size();
    std::string_view line = schema_text.substr(start, end - start);
    start = end + 1;
    std::string_view stripped = line;
    while (!stripped.empty() && (stripped.front() == ' ' || stripped.front() == '\t' ||
                                 stripped.front() == '\r'))
      stripped.remove_prefix(1);
    while (!stripped.empty() && (stripped.back() == ' ' || stripped.back() == '\t' ||
                                 stripped.back() == '\r'))
      stripped.remove_suffix(1);
    if (stripped.empty()) continue;
    SchemaTriple triple;
    if (detail::parse_schema_line(stripped, triple)) {
      schema.insert(std::move(triple));
    } else {
      schema.warnings.push_back(std::string(stripped));
    }
  }
  if (schema.triples.empty())
    throw SchemaError("schema text contains no parsable (:A)-[:R]->(:B) lines");
  return schema;
}

// One relationship occurrence, canonicalized so directed usages always read
// source -> target regardless of how the arrow was written.
struct RelUsage {
  std::set<std::string> source_labels;  // empty set = unlabeled endpoint
  std::set<std::string> rel_types;
  std::set<std::string> target_labels;
  bool directed = false;

  bool operator==(const RelUsage&) const = default;
};

inline std::vector<RelUsage> extract_usages(const PatternElement& element) {
  std::vector<RelUsage> usages;
  for (std::size_t r = 0; r < element.rels.size(); ++r) {
    const NodePattern& lhs = element.nodes[r];
    const NodePattern& rhs = element.nodes[r + 1];
    const RelPattern& rel = element.rels[r];
    RelUsage usage;
    for (const auto& t : rel.types) usage.rel_types.insert(unquote_name(t));
    const NodePattern* src = &lhs;
    const NodePattern* dst = &rhs;
    if (rel.direction == Direction::Left) std::swap(src, dst);
    usage.directed = rel.direction != Direction::Undirected;
    for (const auto& l : src->labels) usage.source_labels.insert(unquote_name(l));
    for (const auto& l : dst->labels) usage.target_labels.insert(unquote_name(l));
    usages.push_back(std::move(usage));
  }
  return usages;
}

inline std::vector<RelUsage> extract_usages(const CypherAst& ast) {
  std::vector<RelUsage> usages;
  auto add_parts = [&](const std::vector<PatternPart>& parts) {
    for (const auto& part : parts) {
      auto u = extract_usages(part.element);
      usages.insert(usages.end(), u.begin(), u.end());
    }
  };
  for (const auto& stmt : ast.statements) {
    for (const auto& clause : stmt.clauses) {
      if (const auto* m = std::get_if<MatchClause>(&clause)) add_parts(m->patterns);
      else if (const auto* c = std::get_if<CreateClause>(&clause)) add_parts(c->patterns);
      else if (const auto* g = std::get_if<MergeClause>(&clause)) {
        auto u = extract_usages(g->pattern.element);
        usages.insert(usages.end(), u.begin(), u.end());
      }
    }
  }
  return usages;
}

// Best-effort scan over a raw token stream for (...)-[...]->(...) shapes.
// Used when no AST is available (naive grammar variant).
inline std::vector<RelUsage> extract_usages_tokens(const std::vector<CypherToken>& tokens);

namespace detail {

struct ScannedNode {
  std::set<std::string> labels;
  std::size_t end = 0;  // index just past ')'
  bool ok = false;
};

// Parses `( [var] {:Label}* [{...}] )` starting at `i`, skipping over any
// property map contents.
inline ScannedNode scan_node(const std::vector<CypherToken>& toks, std::size_t i) {
  ScannedNode node;
  if (i >= toks.size() || toks[i].text != "(") return node;
  ++i;
  if (i < toks.size() && toks[i].kind == TokenKind::Identifier &&
      (i + 1 < toks.size() && (toks[i + 1].text == ":" || toks[i + 1].text == ")" ||
                               toks[i + 1].text == "{")))
    ++i;
  while (i + 1 < toks.size() && toks[i].text == ":" &&
         (toks[i + 1].kind == TokenKind::Identifier ||
          toks[i + 1].kind == TokenKind::Keyword)) {
    node.labels.insert(unquote_name(toks[i + 1].text));
    i += 2;
  }
  if (i < toks.size() && toks[i].text == "{") {
    int depth = 1;
    ++i;
    while (i < toks.size() && depth > 0) {
      if (toks[i].text == "{") ++depth;
      if (toks[i].text == "}") --depth;
      ++i;
    }
  }
  if (i < toks.size() && toks[i].text == ")") {
    node.ok = true;
    node.end = i + 1;
  }
  return node;
}

struct ScannedRel {
  std::set<std::string> types;
  Direction direction = Direction::Undirected;
  std::size_t end = 0;
  bool ok = false;
};

inline ScannedRel scan_rel(const std::vector<CypherToken>& toks, std::size_t i) {
  ScannedRel rel;
  bool left = false;
  if (i < toks.size() && toks[i].text == "<") {
    left = true;
    ++i;
  }
  if (i >= toks.size() || toks[i].text != "-") return rel;
  ++i;
  if (i < toks.size() && toks[i].text == "[") {
    ++i;
    if (i < toks.size() && toks[i].kind == TokenKind::Identifier &&
        i + 1 < toks.size() && toks[i + 1].text != "|")
      ++i;  // relationship variable
    if (i < toks.size() && toks[i].text == ":") {
      ++i;
      while (i < toks.size() && (toks[i].kind == TokenKind::Identifier ||
                                 toks[i].kind == TokenKind::Keyword)) {
        rel.types.insert(unquote_name(toks[i].text));
        ++i;
        if (i < toks.size() && toks[i].text == "|") {
          ++i;
          if (i < toks.size() && toks[i].text == ":") ++i;
          continue;
        }
        break;
      }
    }
    // skip anything else inside the brackets (ranges, property maps)
    int depth = 1;
    while (i < toks.size() && depth > 0) {
      if (toks[i].text == "[") ++depth;
      if (toks[i].text == "]") --depth;
      ++i;
    }
    if (depth > 0) return rel;
  }
  if (i >= toks.size() || toks[i].text != "-") return rel;
  ++i;
  bool right = false;
  if (i < toks.size() && toks[i].text == ">") {
    right = true;
    ++i;
  }
  if (left && right) return rel;
  rel.direction = left ? Direction::Left
                : right ? Direction::Right
                        : Direction::Undirected;
  rel.ok = true;
  rel.end = i;
  return rel;
}

}  // namespace detail

inline std::vector<RelUsage> extract_usages_tokens(const std::vector<CypherToken>& tokens) {
  std::vector<RelUsage> usages;
  std::size_t i = 0;
  while (i < tokens.size()) {
    auto node = detail::scan_node(tokens, i);
    if (!node.ok) {
      ++i;
      continue;
    }
    // follow the chain as far as it goes
    std::size_t at = node.end;
    detail::ScannedNode lhs = node;
    while (true) {
      auto rel = detail::scan_rel(tokens, at);
      if (!rel.ok) break;
      auto rhs = detail::scan_node(tokens, rel.end);
      if (!rhs.ok) break;
      RelUsage usage;
      usage.rel_types = rel.types;
      usage.directed = rel.direction != Direction::Undirected;
      const auto* src = &lhs.labels;
      const auto* dst = &rhs.labels;
      if (rel.direction == Direction::Left) std::swap(src, dst);
      usage.source_labels = *src;
      usage.target_labels = *dst;
      usages.push_back(std::move(usage));
      lhs = rhs;
      at = rhs.end;
    }
    i = std::max(at, i + 1);
  }
  return usages;
}

struct SchemaCheckOptions {
  bool label_aware = true;           // label-compatible triple required
  bool reject_unknown_types = false; // strict mode: unknown rel types fail
};

namespace detail {

inline bool triple_compatible(const std::set<std::string>& src_labels,
                              const std::set<std::string>& dst_labels,
                              const std::string& s, const std::string& t) {
  bool src_ok = src_labels.empty() || src_labels.count(s) > 0;
  bool dst_ok = dst_labels.empty() || dst_labels.count(t) > 0;
  return src_ok && dst_ok;
}

}  // namespace detail

// Validates relationship usages against the schema. A directed usage of a
// known type must be backed by a compatible triple; when only the mirrored
// orientation is compatible the diagnostic says so. Unknown types and
// undirected usages pass (unless strict mode rejects unknown types).
inline SyntaxVerdict schema_validate(const std::vector<RelUsage>& usages,
                                     const GraphSchema& schema,
                                     const SchemaCheckOptions& opts = {}) {
  SyntaxVerdict verdict;
  if (schema.empty()) {
    verdict.add(SourcePos{0, 1, 1}, "schema is empty");
    return verdict;
  }
  for (const auto& usage : usages) {
    for (const auto& type : usage.rel_types) {
      auto it = schema.rel_type_index.find(type);
      if (it == schema.rel_type_index.end()) {
        if (opts.reject_unknown_types)
          verdict.add(SourcePos{0, 1, 1},
                      "relationship type " + type + " does not appear in the schema");
        continue;
      }
      if (!usage.directed) continue;
      bool forward = false, mirrored = false;
      for (const auto& [s, t] : it->second) {
        if (detail::triple_compatible(usage.source_labels, usage.target_labels, s, t))
          forward = true;
        if (detail::triple_compatible(usage.target_labels, usage.source_labels, s, t))
          mirrored = true;
      }
      if (!opts.label_aware) {
        // Direction-evidence mode: only a demonstrable flip rejects.
        if (!forward && mirrored)
          verdict.add(SourcePos{0, 1, 1},
                      "relationship " + type + " used in the opposite direction");
        continue;
      }
      if (forward) continue;
      if (mirrored) {
        verdict.add(SourcePos{0, 1, 1},
                    "relationship " + type + " used in the opposite direction");
      } else {
        verdict.add(SourcePos{0, 1, 1},
                    "no schema triple matches the labeled use of " + type);
      }
    }
  }
  return verdict;
}

}  // namespace cyfunnel
