#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pie/ast.hpp"
#include "pie/diagnostics.hpp"

namespace pie {

struct ParseResult {
  std::optional<ast::Program> program;  // present iff no error diagnostics
  std::vector<Diagnostic> diagnostics;
};

ParseResult parse_program(std::string_view source, std::string origin);

// Parses one expression covering the whole input (CLI argument literals).
struct ParseExprResult {
  ast::ExprPtr expr;  // null on error
  std::vector<Diagnostic> diagnostics;
};
ParseExprResult parse_expression(std::string_view source);

// Unparses to valid pie source; parsing it back yields an equal AST
// (modulo spans).
std::string pretty_print(const ast::Program& p);
std::string pretty_print(const ast::Expr& e);
std::string pretty_print(const ast::TypeExpr& t);

}  // namespace pie
