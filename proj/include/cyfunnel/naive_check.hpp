#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cyfunnel/diagnostics.hpp"
#include "cyfunnel/lexer.hpp"

namespace cyfunnel {

// Clause keywords whose immediate repetition marks a malformed query.
inline const std::unordered_set<std::string>& clause_keyword_set() {
  static const std::unordered_set<std::string> kw = {
      "MATCH", "RETURN", "WITH",  "WHERE", "CREATE", "MERGE", "DELETE",
      "SET",   "REMOVE", "UNWIND", "CALL",  "LIMIT",  "SKIP",  "UNION"};
  return kw;
}

// Lightweight grammar check: balanced brackets, no duplicated clause
// keywords, and at least one of MATCH/CREATE/RETURN/WITH present.
// Operates on the token stream so quoted strings never trip the rules.
inline SyntaxVerdict naive_validate(std::string_view text) {
  SyntaxVerdict verdict;
  LexResult lexed = tokenize(text);
  for (const auto& err : lexed.errors) verdict.add(err.pos, err.message);

  // (a) bracket balance with correct nesting
  struct Open {
    char c;
    SourcePos pos;
  };
  std::vector<Open> stack;
  auto closer_for = [](char c) { return c == '(' ? ')' : c == '[' ? ']' : '}'; };
  for (const auto& tok : lexed.tokens) {
    if (tok.kind != TokenKind::Symbol || tok.text.size() != 1) continue;
    char c = tok.text[0];
    if (c == '(' || c == '[' || c == '{') {
      stack.push_back({c, tok.pos});
    } else if (c == ')' || c == ']' || c == '}') {
      if (stack.empty()) {
        verdict.add(tok.pos, std::string("unmatched '") + c + "'");
      } else if (closer_for(stack.back().c) != c) {
        verdict.add(tok.pos, std::string("mismatched '") + c + "', expected '" +
                                 closer_for(stack.back().c) + "'");
        stack.pop_back();
      } else {
        stack.pop_back();
      }
    }
  }
  for (const auto& open : stack)
    verdict.add(open.pos, std::string("unclosed '") + open.c + "'");

  // (b) no clause keyword immediately followed by itself
  for (std::size_t i = 0; i + 1 < lexed.tokens.size(); ++i) {
    const auto& a = lexed.tokens[i];
    const auto& b = lexed.tokens[i + 1];
    if (a.kind != TokenKind::Keyword || b.kind != TokenKind::Keyword) continue;
    std::string ua = ascii_upper(a.text);
    if (ua == ascii_upper(b.text) && clause_keyword_set().count(ua) > 0)
      verdict.add(b.pos, "duplicated clause keyword '" + ua + "'");
  }

  // (c) at least one core clause keyword
  bool has_clause = false;
  for (const auto& tok : lexed.tokens) {
    if (tok.kind != TokenKind::Keyword) continue;
    std::string u = ascii_upper(tok.text);
    if (u == "MATCH" || u == "CREATE" || u == "RETURN" || u == "WITH") {
      has_clause = true;
      break;
    }
  }
  if (!has_clause)
    verdict.add(SourcePos{0, 1, 1},
                "query contains no MATCH, CREATE, RETURN or WITH clause");

  return verdict;
}

}  // namespace cyfunnel
