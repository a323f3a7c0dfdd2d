#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pie/ast.hpp"

namespace pie {

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  ast::Span span;
  std::string message;
};

struct LineCol {
  uint32_t line = 1;  // 1-based
  uint32_t col = 1;
};

LineCol line_col_at(std::string_view source, uint32_t offset);

// `origin:line:col: severity: message`
std::string render_diagnostic(const Diagnostic& d, std::string_view source,
                              std::string_view origin);

std::string render_diagnostics(const std::vector<Diagnostic>& ds, std::string_view source,
                               std::string_view origin);

}  // namespace pie
