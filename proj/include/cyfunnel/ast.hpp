#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cyfunnel {

// ---------------------------------------------------------------------------
// Expressions. One node type keeps the tree value-semantic and cheap to walk;
// `children` layout depends on `kind` (documented per enumerator).
// ---------------------------------------------------------------------------

struct Expr {
  enum class Kind {
    Or,          // children: operands (2+)
    Xor,         // children: operands (2+)
    And,         // children: operands (2+)
    Not,         // children: [operand]
    Comparison,  // children: operands; text holds ops joined by '\x1f'
    Add,         // children: operands; text holds ops ("+"/"-") joined
    Mul,         // children: operands; text holds ops ("*"/"/"/"%") joined
    Pow,         // children: operands (left-assoc chain)
    Unary,       // text: "+"/"-"; children: [operand]
    StringOp,    // text: "STARTS WITH"/"ENDS WITH"/"CONTAINS"; children: [lhs, rhs]
    InList,      // children: [lhs, rhs]
    Index,       // children: [base, index]
    IsNull,      // children: [operand]
    IsNotNull,   // children: [operand]
    Property,    // text: property name; children: [base]
    Call,        // text: function name; children: args; distinct flag below
    CountStar,
    Variable,    // text: name
    Parameter,   // text: name without '$'
    IntLiteral,  // text: digits
    FloatLiteral,
    StringLiteral,  // text: raw literal including quotes
    BoolLiteral,    // text: "true"/"false"
    NullLiteral,
    ListLiteral,  // children: elements
    MapLiteral,   // children: values; map_keys holds names
    Case,         // children: [subject?] then when/then pairs then else?; see flags
  };

  Kind kind = Kind::NullLiteral;
  std::string text;
  std::vector<Expr> children;
  std::vector<std::string> map_keys;
  bool distinct = false;   // Call: f(DISTINCT ...)
  bool star_arg = false;   // Call: f(*)
  bool has_subject = false;  // Case: CASE expr WHEN ...
  bool has_else = false;     // Case: ... ELSE expr END
};

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

enum class Direction { Left, Right, Undirected };

struct NodePattern {
  std::optional<std::string> variable;
  std::vector<std::string> labels;
  std::optional<Expr> properties;  // map literal or parameter
};

struct RelPattern {
  std::optional<std::string> variable;
  std::vector<std::string> types;  // alternation via '|'
  Direction direction = Direction::Undirected;
  bool variable_length = false;
  std::optional<long long> min_hops;
  std::optional<long long> max_hops;
  std::optional<Expr> properties;
};

// Linear chain: nodes.size() == rels.size() + 1.
struct PatternElement {
  std::vector<NodePattern> nodes;
  std::vector<RelPattern> rels;
};

struct PatternPart {
  std::optional<std::string> path_variable;
  PatternElement element;
};

// ---------------------------------------------------------------------------
// Clauses
// ---------------------------------------------------------------------------

struct SortItem {
  Expr expr;
  bool descending = false;
};

struct ReturnItem {
  Expr expr;
  std::optional<std::string> alias;
};

struct ProjectionBody {
  bool distinct = false;
  bool star = false;
  std::vector<ReturnItem> items;
  std::vector<SortItem> order_by;
  std::optional<Expr> skip;
  std::optional<Expr> limit;
};

struct MatchClause {
  bool optional = false;
  std::vector<PatternPart> patterns;
  std::optional<Expr> where;
};

struct UnwindClause {
  Expr expr;
  std::string alias;
};

struct WithClause {
  ProjectionBody body;
  std::optional<Expr> where;
};

struct ReturnClause {
  ProjectionBody body;
};

struct CreateClause {
  std::vector<PatternPart> patterns;
};

struct SetItem {
  enum class Kind { Property, Assign, Append, Labels } kind = Kind::Property;
  Expr target;                      // property expression or variable
  std::optional<Expr> value;        // absent for Labels
  std::vector<std::string> labels;  // Labels only
};

struct SetClause {
  std::vector<SetItem> items;
};

struct MergeAction {
  bool on_create = false;  // otherwise ON MATCH
  SetClause set;
};

struct MergeClause {
  PatternPart pattern;
  std::vector<MergeAction> actions;
};

struct DeleteClause {
  bool detach = false;
  std::vector<Expr> exprs;
};

struct RemoveItem {
  Expr target;
  std::vector<std::string> labels;  // non-empty for label removal
};

struct RemoveClause {
  std::vector<RemoveItem> items;
};

struct YieldItem {
  std::string name;
  std::optional<std::string> alias;
};

struct CallClause {
  std::string procedure;  // dotted name
  std::vector<Expr> args;
  bool has_args = false;  // parentheses present
  std::vector<YieldItem> yields;
  std::optional<Expr> where;
};

using Clause = std::variant<MatchClause, UnwindClause, WithClause, ReturnClause,
                            CreateClause, MergeClause, SetClause, DeleteClause,
                            RemoveClause, CallClause>;

struct Statement {
  std::vector<Clause> clauses;
};

struct CypherAst {
  std::vector<Statement> statements;   // joined by UNION
  std::vector<bool> union_all;         // size == statements.size() - 1
};

}  // namespace cyfunnel
