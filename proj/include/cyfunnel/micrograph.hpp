#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace cyfunnel {

// ---------------------------------------------------------------------------
// Graph model
// ---------------------------------------------------------------------------

using Scalar = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct MicroNode {
  std::string id;
  std::set<std::string> labels;
  std::map<std::string, Scalar> props;
};

struct MicroEdge {
  std::string src;
  std::string type;
  std::string dst;
  std::map<std::string, Scalar> props;
  const MicroNode* src_node = nullptr;
  const MicroNode* dst_node = nullptr;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable in-memory property graph used as the execution backend.
struct MicroGraph {
  std::vector<MicroNode> nodes;
  std::vector<MicroEdge> edges;

  static Scalar scalar_from_json(const nlohmann::json& v) {
    if (v.is_null()) return std::monostate{};
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer() || v.is_number_unsigned())
      return v.get<std::int64_t>();
    if (v.is_number_float()) return v.get<double>();
    if (v.is_string()) return v.get<std::string>();
    throw GraphError("property values must be scalars");
  }

  static std::string id_from_json(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned())
      return std::to_string(v.get<std::int64_t>());
    throw GraphError("node ids must be strings or integers");
  }

  static MicroGraph from_json(const nlohmann::json& doc) {
    MicroGraph g;
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
      throw GraphError("graph document needs \"nodes\" and \"edges\" arrays");
    for (const auto& jn : doc["nodes"]) {
      MicroNode node;
      node.id = id_from_json(jn.at("id"));
      if (jn.contains("labels"))
        for (const auto& l : jn["labels"]) node.labels.insert(l.get<std::string>());
      if (jn.contains("props"))
        for (const auto& [k, v] : jn["props"].items())
          node.props[k] = scalar_from_json(v);
      g.nodes.push_back(std::move(node));
    }
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const MicroNode& a, const MicroNode& b) { return a.id < b.id; });
    auto find_node = [&](const std::string& id) -> const MicroNode* {
      auto it = std::lower_bound(
          g.nodes.begin(), g.nodes.end(), id,
          [](const MicroNode& n, const std::string& key) { return n.id < key; });
      if (it == g.nodes.end() || it->id != id) return nullptr;
      return &*it;
    };
    for (const auto& je : doc["edges"]) {
      MicroEdge edge;
      edge.src = id_from_json(je.at("src"));
      edge.type = je.at("type").get<std::string>();
      edge.dst = id_from_json(je.at("dst"));
      if (je.contains("props"))
        for (const auto& [k, v] : je["props"].items())
          edge.props[k] = scalar_from_json(v);
      edge.src_node = find_node(edge.src);
      edge.dst_node = find_node(edge.dst);
      if (!edge.src_node || !edge.dst_node)
        throw GraphError("edge references unknown node id: " +
                         (edge.src_node ? edge.dst : edge.src));
      g.edges.push_back(std::move(edge));
    }
    return g;
  }

  static MicroGraph load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError("cannot open graph fixture: " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw GraphError("graph fixture is not valid JSON: " + std::string(e.what()));
    }
    return from_json(doc);
  }
};

// ---------------------------------------------------------------------------
// Execution outcome
// ---------------------------------------------------------------------------

enum class ExecStatus { Success, SyntaxError, RuntimeError };

inline const char* to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::Success: return "success";
    case ExecStatus::SyntaxError: return "syntax_error";
    case ExecStatus::RuntimeError: return "runtime_error";
  }
  return "?";
}

struct ExecutionOutcome {
  ExecStatus status = ExecStatus::Success;
  std::vector<std::string> rows;  // canonically serialized, present on success
  std::string message;            // on error
};

// ---------------------------------------------------------------------------
// The micro engine's own minimal parser. Deliberately a separate code path
// from the library's grammar filter so the two can disagree, the way a real
// engine disagrees with a published grammar.
// ---------------------------------------------------------------------------

namespace micro {

struct SyntaxFailure {
  std::string message;
};
struct Unsupported {
  std::string message;
};

struct Tok {
  enum class Kind { Ident, Int, Float, Str, Sym, End };
  Kind kind = Kind::End;
  std::string text;   // identifiers keep original spelling; Sym holds the symbol
  std::string upper;  // uppercase of text for keyword checks
  std::int64_t ival = 0;
  double fval = 0.0;
  std::string sval;  // unescaped string value
};

inline std::vector<Tok> lex(std::string_view q) {
  std::vector<Tok> out;
  std::size_t i = 0;
  auto upper = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  };
  while (i < q.size()) {
    unsigned char c = static_cast<unsigned char>(q[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (q[i] == '/' && i + 1 < q.size() && q[i + 1] == '/') {
      while (i < q.size() && q[i] != '\n') ++i;
      continue;
    }
    if (q[i] == '/' && i + 1 < q.size() && q[i + 1] == '*') {
      std::size_t close = q.find("*/", i + 2);
      if (close == std::string_view::npos) throw SyntaxFailure{"unterminated comment"};
      i = close + 2;
      continue;
    }
    if (std::isalpha(c) || q[i] == '_') {
      std::size_t b = i;
      while (i < q.size() && (std::isalnum(static_cast<unsigned char>(q[i])) ||
                              q[i] == '_'))
        ++i;
      Tok t;
      t.kind = Tok::Kind::Ident;
      t.text = std::string(q.substr(b, i - b));
      t.upper = upper(t.text);
      out.push_back(std::move(t));
      continue;
    }
    if (q[i] == '`') {
      std::size_t b = ++i;
      std::string name;
      bool closed = false;
      while (i < q.size()) {
        if (q[i] == '`') {
          if (i + 1 < q.size() && q[i + 1] == '`') {
            name += '`';
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        name += q[i++];
      }
      if (!closed) throw SyntaxFailure{"unterminated backtick name"};
      (void)b;
      Tok t;
      t.kind = Tok::Kind::Ident;
      t.text = name;
      t.upper = upper(name);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t b = i;
      while (i < q.size() && std::isdigit(static_cast<unsigned char>(q[i]))) ++i;
      bool is_float = false;
      if (i + 1 < q.size() && q[i] == '.' &&
          std::isdigit(static_cast<unsigned char>(q[i + 1]))) {
        is_float = true;
        ++i;
        while (i < q.size() && std::isdigit(static_cast<unsigned char>(q[i]))) ++i;
      }
      Tok t;
      t.text = std::string(q.substr(b, i - b));
      try {
        if (is_float) {
          t.kind = Tok::Kind::Float;
          t.fval = std::stod(t.text);
        } else {
          t.kind = Tok::Kind::Int;
          t.ival = std::stoll(t.text);
        }
      } catch (const std::exception&) {
        throw SyntaxFailure{"numeric literal out of range: " + t.text};
      }
      out.push_back(std::move(t));
      continue;
    }
    if (q[i] == '\'' || q[i] == '"') {
      char quote = q[i++];
      std::string value;
      bool closed = false;
      while (i < q.size()) {
        char d = q[i];
        if (d == '\\' && i + 1 < q.size()) {
          char e = q[i + 1];
          switch (e) {
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case 'r': value += '\r'; break;
            case '\\': value += '\\'; break;
            case '\'': value += '\''; break;
            case '"': value += '"'; break;
            default: value += e; break;
          }
          i += 2;
          continue;
        }
        ++i;
        if (d == quote) {
          closed = true;
          break;
        }
        value += d;
      }
      if (!closed) throw SyntaxFailure{"unterminated string literal"};
      Tok t;
      t.kind = Tok::Kind::Str;
      t.sval = std::move(value);
      out.push_back(std::move(t));
      continue;
    }
    // symbols
    static constexpr std::string_view two_char[] = {"<=", ">=", "<>", "+=", ".."};
    std::string_view rest = q.substr(i);
    std::string sym;
    for (auto op : two_char) {
      if (rest.substr(0, op.size()) == op) {
        sym = std::string(op);
        break;
      }
    }
    if (sym.empty()) sym = std::string(1, q[i]);
    i += sym.size();
    Tok t;
    t.kind = Tok::Kind::Sym;
    t.text = sym;
    out.push_back(std::move(t));
  }
  out.push_back(Tok{});
  return out;
}

// Pattern pieces ---------------------------------------------------------

struct PatNode {
  std::string var;  // empty = anonymous
  std::set<std::string> labels;
  std::map<std::string, Scalar> props;
};

enum class HopDir { Out, In, Both };

struct PatRel {
  std::string var;
  std::set<std::string> types;
  HopDir dir = HopDir::Both;
  std::map<std::string, Scalar> props;
};

// WHERE predicate tree ------------------------------------------------------

struct Operand {
  enum class Kind { Prop, Var, Literal } kind = Kind::Literal;
  std::string var;
  std::string prop;
  Scalar literal;
};

struct Cond;
struct Cond {
  enum class Kind { Compare, Truthy, And, Or } kind = Kind::Compare;
  Operand lhs, rhs;
  std::string op;
  std::vector<Cond> children;
};

struct ReturnEntry {
  enum class Kind { Var, Prop, CountStar } kind = Kind::Var;
  std::string var;
  std::string prop;
  std::string alias;  // display name; defaults to source text
};

struct OrderKey {
  // either a projected column (by index) or a fresh var/prop lookup
  int column = -1;
  Operand operand;
  bool descending = false;
};

struct MicroQuery {
  std::vector<PatNode> nodes;
  std::vector<PatRel> rels;
  std::optional<Cond> where;
  bool distinct = false;
  bool count_star = false;
  std::vector<ReturnEntry> items;
  std::vector<OrderKey> order;
  std::optional<std::int64_t> limit;
};

class MicroParser {
 public:
  explicit MicroParser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

  MicroQuery parse() {
    // Clause-level structure first.
    if (tok().kind == Tok::Kind::End) throw SyntaxFailure{"empty query"};
    check_clause_structure();

    MicroQuery q;
    expect_kw("MATCH");
    parse_pattern(q);
    if (at_kw("WHERE")) {
      ++pos_;
      q.where = parse_or();
    }
    expect_kw("RETURN");
    parse_return(q);
    if (tok().kind != Tok::Kind::End)
      throw SyntaxFailure{"unexpected trailing input: " + tok().text};
    return q;
  }

 private:
  std::vector<Tok> toks_;
  std::size_t pos_ = 0;

  const Tok& tok(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_kw(std::string_view kw, std::size_t k = 0) const {
    return tok(k).kind == Tok::Kind::Ident && tok(k).upper == kw;
  }
  bool at_sym(std::string_view s, std::size_t k = 0) const {
    return tok(k).kind == Tok::Kind::Sym && tok(k).text == s;
  }
  void expect_kw(std::string_view kw) {
    if (!at_kw(kw)) throw SyntaxFailure{"expected " + std::string(kw)};
    ++pos_;
  }
  void expect_sym(std::string_view s) {
    if (!at_sym(s)) throw SyntaxFailure{"expected '" + std::string(s) + "'"};
    ++pos_;
  }

  // Scans the whole token stream, checks bracket balance and classifies the
  // clause skeleton before any detailed parsing.
  void check_clause_structure() {
    static const std::set<std::string> writes = {"CREATE", "MERGE", "SET",
                                                 "DELETE", "DETACH", "REMOVE"};
    static const std::set<std::string> unsupported = {"WITH", "UNWIND", "CALL",
                                                      "UNION", "OPTIONAL", "FOREACH",
                                                      "LOAD"};
    std::vector<char> stack;
    std::vector<std::string> starters;
    for (std::size_t k = 0; toks_[k].kind != Tok::Kind::End; ++k) {
      const Tok& t = toks_[k];
      if (t.kind == Tok::Kind::Sym) {
        const std::string& s = t.text;
        if (s == "(" || s == "[" || s == "{") stack.push_back(s[0]);
        else if (s == ")" || s == "]" || s == "}") {
          char open = s[0] == ')' ? '(' : s[0] == ']' ? '[' : '{';
          if (stack.empty() || stack.back() != open)
            throw SyntaxFailure{"unbalanced '" + s + "'"};
          stack.pop_back();
        }
        continue;
      }
      if (t.kind != Tok::Kind::Ident || !stack.empty()) continue;
      if (writes.count(t.upper))
        throw Unsupported{"read-only engine: " + t.upper + " is not executable"};
      if (unsupported.count(t.upper))
        throw Unsupported{"unsupported construct: " + t.upper};
      if (t.upper == "MATCH" || t.upper == "WHERE" || t.upper == "RETURN")
        starters.push_back(t.upper);
    }
    if (!stack.empty())
      throw SyntaxFailure{std::string("unclosed '") + stack.back() + "'"};

    if (starters.empty() || starters.front() != "MATCH")
      throw SyntaxFailure{"query must start with MATCH"};
    std::size_t n_match = 0, n_where = 0, n_return = 0;
    for (const auto& s : starters) {
      if (s == "MATCH") ++n_match;
      if (s == "WHERE") ++n_where;
      if (s == "RETURN") ++n_return;
    }
    if (n_return == 0) throw SyntaxFailure{"query must contain a RETURN clause"};
    if (n_return > 1) throw SyntaxFailure{"more than one RETURN clause"};
    if (starters.back() != "RETURN") throw SyntaxFailure{"RETURN must be last"};
    if (n_where > 1) throw SyntaxFailure{"more than one WHERE clause"};
    if (n_match > 1) throw Unsupported{"unsupported construct: multiple MATCH clauses"};
    if (n_where == 1 && starters[1] != "WHERE")
      throw SyntaxFailure{"WHERE must follow MATCH"};
  }

  std::map<std::string, Scalar> parse_prop_map() {
    std::map<std::string, Scalar> props;
    expect_sym("{");
    if (!at_sym("}")) {
      while (true) {
        if (tok().kind != Tok::Kind::Ident)
          throw SyntaxFailure{"expected a property name"};
        std::string key = tok().text;
        ++pos_;
        expect_sym(":");
        props[key] = parse_literal();
        if (at_sym(",")) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect_sym("}");
    return props;
  }

  Scalar parse_literal() {
    const Tok& t = tok();
    if (t.kind == Tok::Kind::Int) {
      ++pos_;
      return t.ival;
    }
    if (t.kind == Tok::Kind::Float) {
      ++pos_;
      return t.fval;
    }
    if (t.kind == Tok::Kind::Str) {
      ++pos_;
      return toks_[pos_ - 1].sval;
    }
    if (t.kind == Tok::Kind::Sym && (t.text == "-" || t.text == "+")) {
      bool neg = t.text == "-";
      ++pos_;
      const Tok& n = tok();
      if (n.kind == Tok::Kind::Int) {
        ++pos_;
        return neg ? -n.ival : n.ival;
      }
      if (n.kind == Tok::Kind::Float) {
        ++pos_;
        return neg ? -n.fval : n.fval;
      }
      throw SyntaxFailure{"expected a number after sign"};
    }
    if (t.kind == Tok::Kind::Ident) {
      if (t.upper == "TRUE") {
        ++pos_;
        return true;
      }
      if (t.upper == "FALSE") {
        ++pos_;
        return false;
      }
      if (t.upper == "NULL") {
        ++pos_;
        return std::monostate{};
      }
    }
    if (t.kind == Tok::Kind::Sym && t.text == "$")
      throw Unsupported{"unsupported construct: parameters"};
    throw SyntaxFailure{"expected a literal value"};
  }

  void parse_node(MicroQuery& q) {
    PatNode node;
    expect_sym("(");
    if (tok().kind == Tok::Kind::Ident && !at_sym(":", 1) && !at_sym(")", 1) &&
        !at_sym("{", 1)) {
      throw SyntaxFailure{"malformed node pattern"};
    }
    if (tok().kind == Tok::Kind::Ident) {
      node.var = tok().text;
      ++pos_;
    }
    while (at_sym(":")) {
      ++pos_;
      if (tok().kind != Tok::Kind::Ident) throw SyntaxFailure{"expected a label"};
      node.labels.insert(tok().text);
      ++pos_;
    }
    if (at_sym("{")) node.props = parse_prop_map();
    expect_sym(")");
    q.nodes.push_back(std::move(node));
  }

  void parse_pattern(MicroQuery& q) {
    parse_node(q);
    while (at_sym("-") || at_sym("<")) {
      PatRel rel;
      bool left = false;
      if (at_sym("<")) {
        left = true;
        ++pos_;
      }
      expect_sym("-");
      if (at_sym("[")) {
        ++pos_;
        if (tok().kind == Tok::Kind::Ident) {
          rel.var = tok().text;
          ++pos_;
        }
        if (at_sym(":")) {
          ++pos_;
          while (true) {
            if (tok().kind != Tok::Kind::Ident)
              throw SyntaxFailure{"expected a relationship type"};
            rel.types.insert(tok().text);
            ++pos_;
            if (at_sym("|")) {
              ++pos_;
              if (at_sym(":")) ++pos_;
              continue;
            }
            break;
          }
        }
        if (at_sym("*"))
          throw Unsupported{"unsupported construct: variable-length relationship"};
        if (at_sym("{")) rel.props = parse_prop_map();
        expect_sym("]");
      }
      expect_sym("-");
      bool right = false;
      if (at_sym(">")) {
        right = true;
        ++pos_;
      }
      if (left && right) throw SyntaxFailure{"relationship with two arrowheads"};
      rel.dir = left ? HopDir::In : right ? HopDir::Out : HopDir::Both;
      q.rels.push_back(std::move(rel));
      parse_node(q);
    }
    if (at_sym(","))
      throw Unsupported{"unsupported construct: multiple pattern parts"};
  }

  Operand parse_operand() {
    const Tok& t = tok();
    if (t.kind == Tok::Kind::Ident && t.upper != "TRUE" && t.upper != "FALSE" &&
        t.upper != "NULL") {
      Operand op;
      op.var = t.text;
      ++pos_;
      if (at_sym(".")) {
        ++pos_;
        if (tok().kind != Tok::Kind::Ident)
          throw SyntaxFailure{"expected a property name after '.'"};
        op.kind = Operand::Kind::Prop;
        op.prop = tok().text;
        ++pos_;
        if (at_sym("."))
          throw Unsupported{"unsupported construct: nested property access"};
      } else {
        if (at_sym("("))
          throw Unsupported{"unsupported construct: function call in WHERE"};
        op.kind = Operand::Kind::Var;
      }
      return op;
    }
    Operand op;
    op.kind = Operand::Kind::Literal;
    op.literal = parse_literal();
    return op;
  }

  Cond parse_or() {
    Cond first = parse_and();
    if (!at_kw("OR")) return first;
    Cond node;
    node.kind = Cond::Kind::Or;
    node.children.push_back(std::move(first));
    while (at_kw("OR")) {
      ++pos_;
      node.children.push_back(parse_and());
    }
    return node;
  }

  Cond parse_and() {
    Cond first = parse_primary_cond();
    if (!at_kw("AND")) return first;
    Cond node;
    node.kind = Cond::Kind::And;
    node.children.push_back(std::move(first));
    while (at_kw("AND")) {
      ++pos_;
      node.children.push_back(parse_primary_cond());
    }
    return node;
  }

  Cond parse_primary_cond() {
    if (at_kw("NOT")) throw Unsupported{"unsupported construct: NOT in WHERE"};
    if (at_kw("XOR")) throw Unsupported{"unsupported construct: XOR in WHERE"};
    if (at_sym("(")) {
      ++pos_;
      Cond inner = parse_or();
      expect_sym(")");
      return inner;
    }
    Cond cond;
    cond.lhs = parse_operand();
    if (at_kw("IS"))
      throw Unsupported{"unsupported construct: IS NULL in WHERE"};
    static constexpr std::string_view cmp_ops[] = {"=", "<>", "<=", ">=", "<", ">"};
    for (auto op : cmp_ops) {
      if (at_sym(op)) {
        cond.kind = Cond::Kind::Compare;
        cond.op = std::string(op);
        ++pos_;
        cond.rhs = parse_operand();
        return cond;
      }
    }
    if (at_sym("+") || at_sym("-") || at_sym("*") || at_sym("/") || at_sym("%") ||
        at_sym("^"))
      throw Unsupported{"unsupported construct: arithmetic in WHERE"};
    if (at_kw("STARTS") || at_kw("ENDS") || at_kw("CONTAINS") || at_kw("IN"))
      throw Unsupported{"unsupported construct: string/list operator in WHERE"};
    cond.kind = Cond::Kind::Truthy;
    return cond;
  }

  void parse_return(MicroQuery& q) {
    if (at_kw("DISTINCT")) {
      q.distinct = true;
      ++pos_;
    }
    if (at_sym("*")) throw Unsupported{"unsupported construct: RETURN *"};
    // lone count(*)
    if (at_kw("COUNT") && at_sym("(", 1) && at_sym("*", 2) && at_sym(")", 3)) {
      pos_ += 4;
      q.count_star = true;
      if (q.distinct)
        throw Unsupported{"unsupported construct: DISTINCT count(*)"};
      if (at_sym(","))
        throw Unsupported{"unsupported construct: count(*) mixed with other items"};
      parse_tail(q);
      return;
    }
    while (true) {
      ReturnEntry entry;
      if (tok().kind != Tok::Kind::Ident)
        throw SyntaxFailure{"expected a return item"};
      if (at_kw("COUNT") && at_sym("(", 1))
        throw Unsupported{"unsupported construct: count(*) mixed with other items"};
      entry.var = tok().text;
      entry.alias = tok().text;
      ++pos_;
      if (at_sym(".")) {
        ++pos_;
        if (tok().kind != Tok::Kind::Ident)
          throw SyntaxFailure{"expected a property name after '.'"};
        entry.kind = ReturnEntry::Kind::Prop;
        entry.prop = tok().text;
        entry.alias = entry.var + "." + entry.prop;
        ++pos_;
      } else if (at_sym("(")) {
        throw Unsupported{"unsupported construct: function call in RETURN"};
      } else {
        entry.kind = ReturnEntry::Kind::Var;
      }
      if (at_kw("AS")) {
        ++pos_;
        if (tok().kind != Tok::Kind::Ident) throw SyntaxFailure{"expected an alias"};
        entry.alias = tok().text;
        ++pos_;
      }
      q.items.push_back(std::move(entry));
      if (at_sym(",")) {
        ++pos_;
        continue;
      }
      break;
    }
    parse_tail(q);
  }

  void parse_tail(MicroQuery& q) {
    if (at_kw("ORDER")) {
      ++pos_;
      expect_kw("BY");
      if (q.count_star)
        throw Unsupported{"unsupported construct: ORDER BY with count(*)"};
      while (true) {
        OrderKey key;
        if (tok().kind != Tok::Kind::Ident)
          throw SyntaxFailure{"expected an ORDER BY item"};
        std::string var = tok().text;
        ++pos_;
        if (at_sym(".")) {
          ++pos_;
          if (tok().kind != Tok::Kind::Ident)
            throw SyntaxFailure{"expected a property name after '.'"};
          key.operand.kind = Operand::Kind::Prop;
          key.operand.var = var;
          key.operand.prop = tok().text;
          ++pos_;
        } else {
          // alias reference or bare variable
          key.operand.kind = Operand::Kind::Var;
          key.operand.var = var;
        }
        if (at_kw("ASC") || at_kw("ASCENDING")) ++pos_;
        else if (at_kw("DESC") || at_kw("DESCENDING")) {
          key.descending = true;
          ++pos_;
        }
        q.order.push_back(std::move(key));
        if (at_sym(",")) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    if (at_kw("SKIP")) throw Unsupported{"unsupported construct: SKIP"};
    if (at_kw("LIMIT")) {
      ++pos_;
      if (tok().kind != Tok::Kind::Int)
        throw SyntaxFailure{"expected an integer after LIMIT"};
      q.limit = tok().ival;
      ++pos_;
    }
  }
};

// Evaluation -----------------------------------------------------------------

struct Binding {
  std::map<std::string, const MicroNode*> nodes;
  std::map<std::string, const MicroEdge*> edges;
  std::vector<const MicroNode*> chain_nodes;
  std::vector<const MicroEdge*> chain_edges;
};

inline bool props_match(const std::map<std::string, Scalar>& want,
                        const std::map<std::string, Scalar>& have) {
  for (const auto& [k, v] : want) {
    auto it = have.find(k);
    if (it == have.end()) return false;
    const Scalar& a = v;
    const Scalar& b = it->second;
    // numeric values compare across int/double
    auto num = [](const Scalar& s, double& out) {
      if (const auto* i = std::get_if<std::int64_t>(&s)) {
        out = static_cast<double>(*i);
        return true;
      }
      if (const auto* d = std::get_if<double>(&s)) {
        out = *d;
        return true;
      }
      return false;
    };
    double x, y;
    if (num(a, x) && num(b, y)) {
      if (x != y) return false;
      continue;
    }
    if (a != b) return false;
  }
  return true;
}

inline bool node_matches(const PatNode& pat, const MicroNode& node) {
  for (const auto& l : pat.labels)
    if (!node.labels.count(l)) return false;
  return props_match(pat.props, node.props);
}

inline nlohmann::json scalar_to_json(const Scalar& v) {
  if (std::holds_alternative<std::monostate>(v)) return nullptr;
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

inline nlohmann::json node_to_json(const MicroNode& n) {
  nlohmann::json j;  // std::map-backed: keys serialize sorted
  j["labels"] = n.labels;
  auto& props = j["props"] = nlohmann::json::object();
  for (const auto& [k, v] : n.props) props[k] = scalar_to_json(v);
  return j;
}

inline nlohmann::json edge_to_json(const MicroEdge& e) {
  nlohmann::json j;
  j["type"] = e.type;
  auto& props = j["props"] = nlohmann::json::object();
  for (const auto& [k, v] : e.props) props[k] = scalar_to_json(v);
  return j;
}

class Evaluator {
 public:
  Evaluator(const MicroGraph& graph, const MicroQuery& query)
      : g_(graph), q_(query) {}

  std::vector<std::string> run() {
    enumerate(0, Binding{});

    std::vector<std::string> rows;
    if (q_.count_star) {
      nlohmann::json row = nlohmann::json::array();
      row.push_back(static_cast<std::int64_t>(matches_.size()));
      rows.push_back(row.dump());
      return rows;
    }

    struct ProjectedRow {
      nlohmann::json row;
      const Binding* binding;
    };
    std::vector<ProjectedRow> projected;
    projected.reserve(matches_.size());
    for (const auto& b : matches_) projected.push_back({project(b), &b});

    if (!q_.order.empty()) {
      std::stable_sort(projected.begin(), projected.end(),
                       [&](const ProjectedRow& a, const ProjectedRow& b) {
                         return order_less(a, b);
                       });
    } else {
      std::stable_sort(projected.begin(), projected.end(),
                       [](const ProjectedRow& a, const ProjectedRow& b) {
                         return a.row.dump() < b.row.dump();
                       });
    }

    for (const auto& p : projected) rows.push_back(p.row.dump());
    if (q_.distinct) {
      std::vector<std::string> unique;
      std::set<std::string> seen;
      for (auto& r : rows)
        if (seen.insert(r).second) unique.push_back(std::move(r));
      rows = std::move(unique);
    }
    if (q_.limit && static_cast<std::int64_t>(rows.size()) > *q_.limit)
      rows.resize(static_cast<std::size_t>(std::max<std::int64_t>(*q_.limit, 0)));
    return rows;
  }

 private:
  const MicroGraph& g_;
  const MicroQuery& q_;
  std::vector<Binding> matches_;

  void bind_node(std::size_t idx, const MicroNode* node, Binding b) {
    const PatNode& pat = q_.nodes[idx];
    if (!pat.var.empty()) {
      auto it = b.nodes.find(pat.var);
      if (it != b.nodes.end() && it->second != node) return;
      b.nodes[pat.var] = node;
    }
    b.chain_nodes.push_back(node);
    enumerate(idx + 1, std::move(b));
  }

  void enumerate(std::size_t node_idx, Binding b) {
    if (node_idx == 0) {
      for (const auto& n : g_.nodes)
        if (node_matches(q_.nodes[0], n)) bind_node(0, &n, b);
      return;
    }
    if (node_idx == q_.nodes.size()) {
      if (!q_.where || eval_cond(*q_.where, b)) matches_.push_back(std::move(b));
      return;
    }
    const PatRel& rel = q_.rels[node_idx - 1];
    const MicroNode* cur = b.chain_nodes.back();
    for (const auto& e : g_.edges) {
      if (!rel.types.empty() && !rel.types.count(e.type)) continue;
      if (!props_match(rel.props, e.props)) continue;
      bool already_used = false;
      for (const auto* used : b.chain_edges)
        if (used == &e) already_used = true;
      if (already_used) continue;  // relationship uniqueness
      auto try_step = [&](const MicroNode* from, const MicroNode* to) {
        if (from != cur) return;
        if (!node_matches(q_.nodes[node_idx], *to)) return;
        if (!rel.var.empty()) {
          auto it = b.edges.find(rel.var);
          if (it != b.edges.end() && it->second != &e) return;
        }
        Binding nb = b;
        if (!rel.var.empty()) nb.edges[rel.var] = &e;
        nb.chain_edges.push_back(&e);
        bind_node(node_idx, to, std::move(nb));
      };
      if (rel.dir == HopDir::Out || rel.dir == HopDir::Both)
        try_step(e.src_node, e.dst_node);
      if (rel.dir == HopDir::In || rel.dir == HopDir::Both)
        try_step(e.dst_node, e.src_node);
    }
  }

  Scalar operand_value(const Operand& op, const Binding& b) {
    if (op.kind == Operand::Kind::Literal) return op.literal;
    if (op.kind == Operand::Kind::Prop) {
      auto it = b.nodes.find(op.var);
      if (it != b.nodes.end()) {
        auto p = it->second->props.find(op.prop);
        return p == it->second->props.end() ? Scalar{std::monostate{}} : p->second;
      }
      auto ite = b.edges.find(op.var);
      if (ite != b.edges.end()) {
        auto p = ite->second->props.find(op.prop);
        return p == ite->second->props.end() ? Scalar{std::monostate{}} : p->second;
      }
      throw Unsupported{"unknown variable in expression: " + op.var};
    }
    throw Unsupported{"bare variable is not comparable: " + op.var};
  }

  bool eval_cond(const Cond& c, const Binding& b) {
    switch (c.kind) {
      case Cond::Kind::And:
        for (const auto& ch : c.children)
          if (!eval_cond(ch, b)) return false;
        return true;
      case Cond::Kind::Or:
        for (const auto& ch : c.children)
          if (eval_cond(ch, b)) return true;
        return false;
      case Cond::Kind::Truthy: {
        Scalar v = operand_value(c.lhs, b);
        const auto* p = std::get_if<bool>(&v);
        return p && *p;
      }
      case Cond::Kind::Compare:
        return compare(operand_value(c.lhs, b), operand_value(c.rhs, b), c.op);
    }
    return false;
  }

  static bool compare(const Scalar& a, const Scalar& b, const std::string& op) {
    // comparisons involving null are never true
    if (std::holds_alternative<std::monostate>(a) ||
        std::holds_alternative<std::monostate>(b))
      return false;
    auto num = [](const Scalar& s, double& out) {
      if (const auto* i = std::get_if<std::int64_t>(&s)) {
        out = static_cast<double>(*i);
        return true;
      }
      if (const auto* d = std::get_if<double>(&s)) {
        out = *d;
        return true;
      }
      return false;
    };
    double x, y;
    int cmp;
    if (num(a, x) && num(b, y)) {
      cmp = x < y ? -1 : x > y ? 1 : 0;
    } else if (a.index() != b.index()) {
      return false;  // incomparable types
    } else if (const auto* s = std::get_if<std::string>(&a)) {
      const auto& t = std::get<std::string>(b);
      cmp = *s < t ? -1 : *s > t ? 1 : 0;
    } else {
      bool ba = std::get<bool>(a), bb = std::get<bool>(b);
      cmp = ba == bb ? 0 : (!ba ? -1 : 1);
    }
    if (op == "=") return cmp == 0;
    if (op == "<>") return cmp != 0;
    if (op == "<") return cmp < 0;
    if (op == ">") return cmp > 0;
    if (op == "<=") return cmp <= 0;
    return cmp >= 0;  // ">="
  }

  nlohmann::json project(const Binding& b) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& item : q_.items) {
      if (item.kind == ReturnEntry::Kind::Prop) {
        Operand op;
        op.kind = Operand::Kind::Prop;
        op.var = item.var;
        op.prop = item.prop;
        row.push_back(scalar_to_json(operand_value(op, b)));
        continue;
      }
      auto itn = b.nodes.find(item.var);
      if (itn != b.nodes.end()) {
        row.push_back(node_to_json(*itn->second));
        continue;
      }
      auto ite = b.edges.find(item.var);
      if (ite != b.edges.end()) {
        row.push_back(edge_to_json(*ite->second));
        continue;
      }
      throw Unsupported{"unknown variable in RETURN: " + item.var};
    }
    return row;
  }

  // ORDER BY key: alias reference resolves to the projected column,
  // otherwise the operand evaluates against the binding.
  bool order_less(const auto& a, const auto& b) {
    for (const auto& key : q_.order) {
      nlohmann::json va, vb;
      int column = -1;
      if (key.operand.kind == Operand::Kind::Var) {
        for (std::size_t i = 0; i < q_.items.size(); ++i)
          if (q_.items[i].alias == key.operand.var) column = static_cast<int>(i);
      }
      if (column >= 0) {
        va = a.row[column];
        vb = b.row[column];
      } else if (key.operand.kind == Operand::Kind::Prop) {
        va = scalar_to_json(operand_value(key.operand, *a.binding));
        vb = scalar_to_json(operand_value(key.operand, *b.binding));
      } else {
        throw Unsupported{"ORDER BY item is neither an alias nor a property: " +
                          key.operand.var};
      }
      int cmp = json_compare(va, vb);
      if (cmp != 0) return key.descending ? cmp > 0 : cmp < 0;
    }
    return false;
  }

  static int type_rank(const nlohmann::json& v) {
    if (v.is_null()) return 0;
    if (v.is_boolean()) return 1;
    if (v.is_number()) return 2;
    if (v.is_string()) return 3;
    return 4;
  }

  static int json_compare(const nlohmann::json& a, const nlohmann::json& b) {
    int ra = type_rank(a), rb = type_rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    if (a.is_number()) {
      double x = a.get<double>(), y = b.get<double>();
      return x < y ? -1 : x > y ? 1 : 0;
    }
    std::string sa = a.dump(), sb = b.dump();
    return sa < sb ? -1 : sa > sb ? 1 : 0;
  }
};

// Name resolution before evaluation, the way an engine's semantic pass would
// run it: unknown variables are a compile-time rejection, not a runtime one.
inline void validate_variables(const MicroQuery& q) {
  std::set<std::string> declared;
  for (const auto& n : q.nodes)
    if (!n.var.empty()) declared.insert(n.var);
  for (const auto& r : q.rels)
    if (!r.var.empty()) declared.insert(r.var);
  auto check_operand = [&](const Operand& op) {
    if (op.kind == Operand::Kind::Literal) return;
    if (!declared.count(op.var))
      throw SyntaxFailure{"variable not defined: " + op.var};
  };
  if (q.where) {
    std::vector<const Cond*> stack{&*q.where};
    while (!stack.empty()) {
      const Cond* c = stack.back();
      stack.pop_back();
      if (c->kind == Cond::Kind::And || c->kind == Cond::Kind::Or) {
        for (const auto& ch : c->children) stack.push_back(&ch);
      } else {
        check_operand(c->lhs);
        if (c->kind == Cond::Kind::Compare) check_operand(c->rhs);
      }
    }
  }
  std::set<std::string> aliases;
  for (const auto& item : q.items) {
    if (!declared.count(item.var))
      throw SyntaxFailure{"variable not defined: " + item.var};
    aliases.insert(item.alias);
  }
  for (const auto& key : q.order) {
    if (key.operand.kind == Operand::Kind::Prop) {
      if (!declared.count(key.operand.var))
        throw SyntaxFailure{"variable not defined: " + key.operand.var};
    } else if (!aliases.count(key.operand.var)) {
      if (declared.count(key.operand.var))
        throw Unsupported{"unsupported construct: ORDER BY on a whole entity"};
      throw SyntaxFailure{"ORDER BY references an unknown name: " + key.operand.var};
    }
  }
}

}  // namespace micro

// Executes a query on the micro engine. Never throws: classification errors
// come back in the outcome (syntax_error for the engine's own parse failures,
// runtime_error for valid-but-unsupported constructs and read-only refusals).
inline ExecutionOutcome execute_micro(const MicroGraph& graph, const std::string& query) {
  ExecutionOutcome outcome;
  try {
    auto toks = micro::lex(query);
    micro::MicroParser parser(std::move(toks));
    micro::MicroQuery q = parser.parse();
    micro::validate_variables(q);
    micro::Evaluator eval(graph, q);
    outcome.rows = eval.run();
    outcome.status = ExecStatus::Success;
  } catch (const micro::SyntaxFailure& e) {
    outcome.status = ExecStatus::SyntaxError;
    outcome.message = e.message;
    outcome.rows.clear();
  } catch (const micro::Unsupported& e) {
    outcome.status = ExecStatus::RuntimeError;
    outcome.message = e.message;
    outcome.rows.clear();
  } catch (const std::exception& e) {
    outcome.status = ExecStatus::RuntimeError;
    outcome.message = std::string("internal error: ") + e.what();
    outcome.rows.clear();
  }
  return outcome;
}

}  // namespace cyfunnel
