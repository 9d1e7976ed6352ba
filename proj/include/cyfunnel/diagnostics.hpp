#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cyfunnel {

// Byte offset plus 1-based line/column, tracked by the lexer.
struct SourcePos {
  std::size_t offset = 0;
  int line = 1;
  int column = 1;

  bool operator==(const SourcePos&) const = default;
};

struct Diagnostic {
  SourcePos pos;
  std::string message;
};

// Accept/reject result of a validator. accepted == diagnostics.empty().
struct SyntaxVerdict {
  bool accepted = true;
  std::vector<Diagnostic> diagnostics;

  static SyntaxVerdict ok() { return {}; }

  static SyntaxVerdict rejected(SourcePos pos, std::string message) {
    SyntaxVerdict v;
    v.accepted = false;
    v.diagnostics.push_back({pos, std::move(message)});
    return v;
  }

  void add(SourcePos pos, std::string message) {
    accepted = false;
    diagnostics.push_back({pos, std::move(message)});
  }
};

}  // namespace cyfunnel
