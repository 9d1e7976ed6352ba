#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>

namespace cyfunnel {

namespace detail {

inline bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim_view(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space_byte(s[b])) ++b;
  while (e > b && is_space_byte(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

// One normalization pass; postprocess_raw iterates this to a fixpoint.
inline std::string postprocess_pass(std::string_view in) {
  std::string_view s = trim_view(in);

  // Leading "cypher:" token, or a first line that is just "cypher".
  if (iequals_prefix(s, "cypher")) {
    std::string_view rest = s.substr(6);
    if (!rest.empty() && rest.front() == ':') {
      s = trim_view(rest.substr(1));
    } else {
      std::string_view line_rest = rest;
      std::size_t k = 0;
      while (k < line_rest.size() && (line_rest[k] == ' ' || line_rest[k] == '\t')) ++k;
      if (k == line_rest.size() || line_rest[k] == '\n' || line_rest[k] == '\r') {
        s = trim_view(line_rest.substr(k));
      }
    }
  }

  // Markdown code fence. The opening ``` may carry a language tag;
  // the closing fence is stripped independently so lone fences still vanish.
  if (s.substr(0, 3) == "```") {
    std::string_view body = s.substr(3);
    if (iequals_prefix(body, "cypher")) {
      body = body.substr(6);
    } else {
      std::size_t nl = body.find('\n');
      if (nl != std::string_view::npos && nl > 0 && nl <= 12) {
        std::string_view tag = trim_view(body.substr(0, nl));
        bool alpha_tag = !tag.empty() &&
                         std::all_of(tag.begin(), tag.end(), [](unsigned char c) {
                           return std::isalpha(c) != 0;
                         });
        if (alpha_tag) body = body.substr(nl);
      }
    }
    s = trim_view(body);
  }
  if (s.size() >= 3 && s.substr(s.size() - 3) == "```") {
    s = trim_view(s.substr(0, s.size() - 3));
  }

  // Trailing semicolons (possibly several, with interleaved whitespace).
  while (!s.empty() && s.back() == ';') {
    s = trim_view(s.substr(0, s.size() - 1));
  }

  // Collapse whitespace runs to single spaces outside quoted regions.
  std::string out;
  out.reserve(s.size());
  char quote = 0;  // one of ' " ` or 0
  bool escaped = false;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (quote != 0) {
      out.push_back(c);
      if (quote == '`') {
        if (c == '`') quote = 0;
      } else if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == quote) {
        quote = 0;
      }
      ++i;
      continue;
    }
    if (c == '\'' || c == '"' || c == '`') {
      quote = c;
      escaped = false;
      out.push_back(c);
      ++i;
      continue;
    }
    if (is_space_byte(c)) {
      while (i < s.size() && is_space_byte(s[i])) ++i;
      out.push_back(' ');
      continue;
    }
    out.push_back(c);
    ++i;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace detail

// Cleans raw model output: whitespace, code fences, "cypher:" prefixes and
// trailing semicolons go away; whitespace outside quotes collapses to single
// spaces. Total and idempotent.
inline std::string postprocess_raw(std::string_view raw) {
  std::string cur(detail::trim_view(raw));
  for (int round = 0; round < 16; ++round) {
    std::string next = detail::postprocess_pass(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace cyfunnel
