#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cyfunnel/diagnostics.hpp"

namespace cyfunnel {

enum class TokenKind { Keyword, Identifier, Parameter, Integer, Float, String, Symbol };

struct CypherToken {
  TokenKind kind = TokenKind::Symbol;
  std::string text;  // raw byte span, quotes included for strings
  SourcePos pos;
};

struct LexResult {
  std::vector<CypherToken> tokens;
  std::vector<Diagnostic> errors;

  bool ok() const { return errors.empty(); }
};

inline const std::unordered_set<std::string>& keyword_table() {
  static const std::unordered_set<std::string> kw = {
      "MATCH", "OPTIONAL", "WHERE", "WITH", "RETURN", "UNWIND", "CREATE",
      "MERGE", "ON", "SET", "DELETE", "DETACH", "REMOVE", "CALL", "YIELD",
      "UNION", "ALL", "ORDER", "BY", "SKIP", "LIMIT", "AS", "DISTINCT",
      "AND", "OR", "XOR", "NOT", "IN", "STARTS", "ENDS", "CONTAINS", "IS",
      "NULL", "TRUE", "FALSE", "CASE", "WHEN", "THEN", "ELSE", "END",
      "ASC", "ASCENDING", "DESC", "DESCENDING"};
  return kw;
}

inline std::string ascii_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_keyword_text(std::string_view s) {
  return keyword_table().count(ascii_upper(s)) > 0;
}

// Strips surrounding backticks and un-doubles inner ones, so `Foo` and Foo
// compare equal as names. Non-quoted names pass through unchanged.
inline std::string unquote_name(std::string_view s) {
  if (s.size() < 2 || s.front() != '`' || s.back() != '`') return std::string(s);
  std::string out;
  out.reserve(s.size() - 2);
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    out.push_back(s[i]);
    if (s[i] == '`' && i + 2 < s.size() && s[i + 1] == '`') ++i;
  }
  return out;
}

namespace detail {

inline bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}
inline bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

// Length of a well-formed UTF-8 sequence starting at s[i], or 0.
inline std::size_t utf8_seq_len(std::string_view s, std::size_t i) {
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char b0 = byte(i);
  std::size_t need;
  if (b0 < 0x80) return 1;
  if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2) need = 2;
  else if ((b0 & 0xF0) == 0xE0) need = 3;
  else if ((b0 & 0xF8) == 0xF0 && b0 <= 0xF4) need = 4;
  else return 0;
  if (i + need > s.size()) return 0;
  for (std::size_t k = 1; k < need; ++k)
    if ((byte(i + k) & 0xC0) != 0x80) return 0;
  return need;
}

}  // namespace detail

// Tokenizes Cypher text. Keywords are recognized case-insensitively, quoted
// strings and backtick identifiers are lexed atomically, comments skipped.
// Errors (unterminated quote/comment, invalid UTF-8) are reported with
// positions; lexing continues so callers still see the surrounding tokens.
inline LexResult tokenize(std::string_view text) {
  LexResult result;

  // Whole-input UTF-8 validation; the main loop then treats any byte >= 0x80
  // as an identifier/string character without re-checking.
  {
    std::size_t k = 0;
    int vline = 1, vcol = 1;
    while (k < text.size()) {
      std::size_t len = detail::utf8_seq_len(text, k);
      if (len == 0) {
        result.errors.push_back({{k, vline, vcol}, "invalid UTF-8 byte"});
        break;
      }
      for (std::size_t j = 0; j < len; ++j) {
        if (text[k + j] == '\n') {
          ++vline;
          vcol = 1;
        } else {
          ++vcol;
        }
      }
      k += len;
    }
  }

  std::size_t i = 0;
  int line = 1, column = 1;

  auto pos_here = [&]() { return SourcePos{i, line, column}; };
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++i;
    }
  };
  auto push = [&](TokenKind kind, SourcePos at, std::size_t begin, std::size_t end) {
    result.tokens.push_back({kind, std::string(text.substr(begin, end - begin)), at});
  };

  while (i < text.size()) {
    char c = text[i];
    unsigned char uc = static_cast<unsigned char>(c);

    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      advance(1);
      continue;
    }

    // Comments.
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      SourcePos start = pos_here();
      advance(2);
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '*' && i + 1 < text.size() && text[i + 1] == '/') {
          advance(2);
          closed = true;
          break;
        }
        advance(1);
      }
      if (!closed) result.errors.push_back({start, "unterminated block comment"});
      continue;
    }

    // Quoted strings with backslash escapes.
    if (c == '\'' || c == '"') {
      SourcePos start = pos_here();
      std::size_t begin = i;
      advance(1);
      bool closed = false;
      while (i < text.size()) {
        char d = text[i];
        if (d == '\\' && i + 1 < text.size()) {
          advance(2);
          continue;
        }
        advance(1);
        if (d == c) {
          closed = true;
          break;
        }
      }
      if (!closed) {
        result.errors.push_back({start, "unterminated string literal"});
      }
      push(TokenKind::String, start, begin, i);
      continue;
    }

    // Backtick-quoted identifier; a doubled backtick escapes itself.
    if (c == '`') {
      SourcePos start = pos_here();
      std::size_t begin = i;
      advance(1);
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '`') {
          if (i + 1 < text.size() && text[i + 1] == '`') {
            advance(2);
            continue;
          }
          advance(1);
          closed = true;
          break;
        }
        advance(1);
      }
      if (!closed) result.errors.push_back({start, "unterminated backtick identifier"});
      push(TokenKind::Identifier, start, begin, i);
      continue;
    }

    // Numbers: integer, decimal, optional exponent. "1..3" stays 1 .. 3.
    if (std::isdigit(uc)) {
      SourcePos start = pos_here();
      std::size_t begin = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
        advance(1);
      bool is_float = false;
      if (i + 1 < text.size() && text[i] == '.' &&
          std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
        is_float = true;
        advance(1);
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
          advance(1);
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
        if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
          is_float = true;
          advance(j - i);
          while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
            advance(1);
        }
      }
      push(is_float ? TokenKind::Float : TokenKind::Integer, start, begin, i);
      continue;
    }

    // Parameters: $name or $0.
    if (c == '$') {
      SourcePos start = pos_here();
      std::size_t begin = i;
      advance(1);
      while (i < text.size() &&
             detail::is_ident_char(static_cast<unsigned char>(text[i])))
        advance(1);
      if (i - begin == 1) {
        result.errors.push_back({start, "'$' must be followed by a parameter name"});
      }
      push(TokenKind::Parameter, start, begin, i);
      continue;
    }

    // Identifiers and keywords.
    if (detail::is_ident_start(uc)) {
      SourcePos start = pos_here();
      std::size_t begin = i;
      while (i < text.size() &&
             detail::is_ident_char(static_cast<unsigned char>(text[i])))
        advance(1);
      std::string_view span = text.substr(begin, i - begin);
      push(is_keyword_text(span) ? TokenKind::Keyword : TokenKind::Identifier, start,
           begin, i);
      continue;
    }

    if (uc < 0x20) {
      result.errors.push_back({pos_here(), "unexpected control character"});
      advance(1);
      continue;
    }

    // Symbols; two-character operators first.
    {
      SourcePos start = pos_here();
      std::size_t begin = i;
      static constexpr std::array<std::string_view, 5> two_char = {"<=", ">=", "<>",
                                                                   "+=", ".."};
      std::string_view rest = text.substr(i);
      bool matched = false;
      for (auto op : two_char) {
        if (rest.substr(0, op.size()) == op) {
          advance(op.size());
          matched = true;
          break;
        }
      }
      if (!matched) advance(1);
      push(TokenKind::Symbol, start, begin, i);
      continue;
    }
  }
  return result;
}

}  // namespace cyfunnel
