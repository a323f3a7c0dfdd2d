#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pie/diagnostics.hpp"

namespace pie {

enum class Tok : uint8_t {
  Ident,
  IntLit,
  StrLit,
  PathLit,
  // hard keywords
  KwFunc,
  KwData,
  KwForeign,
  KwRequires,
  KwGenerates,
  KwExists,
  KwRead,
  KwList,
  KwWalk,
  KwReturn,
  KwFail,
  KwVal,
  KwIf,
  KwElse,
  KwWith,
  KwBy,
  KwUnit,
  KwBool,
  KwInt,
  KwString,
  KwPath,
  KwTrue,
  KwFalse,
  KwNull,
  // punctuation
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Colon,
  Arrow,
  Assign,
  EqEq,
  NotEq,
  AndAnd,
  OrOr,
  Plus,
  Bang,
  Question,
  Star,
  Dot,
  Pipe,
  LArrow,
  HashSign,
  Eof,
};

const char* tok_name(Tok t);

struct InterpId {
  std::string name;
  ast::Span span;
};
struct InterpExpr {
  ast::Span span;  // inner expression source range (inside ${...})
};
using TokenPart = std::variant<std::string, InterpId, InterpExpr>;

struct Token {
  Tok kind = Tok::Eof;
  ast::Span span;
  std::string text;              // ident text
  int64_t int_value = 0;         // IntLit
  std::vector<TokenPart> parts;  // StrLit / PathLit
  bool path_relative = true;     // PathLit
};

// Lexes source[begin, end). Lexical errors become diagnostics; the lexer
// always makes progress and ends with an Eof token.
std::vector<Token> lex(std::string_view source, uint32_t begin, uint32_t end,
                       std::vector<Diagnostic>& diags);

bool is_valid_identifier(std::string_view s);

}  // namespace pie
