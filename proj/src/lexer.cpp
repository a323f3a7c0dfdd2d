#include "lexer.hpp"

#include <cerrno>
#include <cstdlib>
#include <unordered_map>

namespace pie {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer literal";
    case Tok::StrLit: return "string literal";
    case Tok::PathLit: return "path literal";
    case Tok::KwFunc: return "'func'";
    case Tok::KwData: return "'data'";
    case Tok::KwForeign: return "'foreign'";
    case Tok::KwRequires: return "'requires'";
    case Tok::KwGenerates: return "'generates'";
    case Tok::KwExists: return "'exists'";
    case Tok::KwRead: return "'read'";
    case Tok::KwList: return "'list'";
    case Tok::KwWalk: return "'walk'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwFail: return "'fail'";
    case Tok::KwVal: return "'val'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwWith: return "'with'";
    case Tok::KwBy: return "'by'";
    case Tok::KwUnit: return "'unit'";
    case Tok::KwBool: return "'bool'";
    case Tok::KwInt: return "'int'";
    case Tok::KwString: return "'string'";
    case Tok::KwPath: return "'path'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwNull: return "'null'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Arrow: return "'->'";
    case Tok::Assign: return "'='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Plus: return "'+'";
    case Tok::Bang: return "'!'";
    case Tok::Question: return "'?'";
    case Tok::Star: return "'*'";
    case Tok::Dot: return "'.'";
    case Tok::Pipe: return "'|'";
    case Tok::LArrow: return "'<-'";
    case Tok::HashSign: return "'#'";
    case Tok::Eof: return "end of input";
  }
  return "?";
}

namespace {

const std::unordered_map<std::string_view, Tok>& keywords() {
  static const std::unordered_map<std::string_view, Tok> kw = {
      {"func", Tok::KwFunc},       {"data", Tok::KwData},           {"foreign", Tok::KwForeign},
      {"requires", Tok::KwRequires}, {"generates", Tok::KwGenerates}, {"exists", Tok::KwExists},
      {"read", Tok::KwRead},       {"list", Tok::KwList},           {"walk", Tok::KwWalk},
      {"return", Tok::KwReturn},   {"fail", Tok::KwFail},           {"val", Tok::KwVal},
      {"if", Tok::KwIf},           {"else", Tok::KwElse},           {"with", Tok::KwWith},
      {"by", Tok::KwBy},           {"unit", Tok::KwUnit},           {"bool", Tok::KwBool},
      {"int", Tok::KwInt},         {"string", Tok::KwString},       {"path", Tok::KwPath},
      {"true", Tok::KwTrue},       {"false", Tok::KwFalse},         {"null", Tok::KwNull},
  };
  return kw;
}

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_letter(c) || is_digit(c) || c == '_'; }

class LexerImpl {
 public:
  LexerImpl(std::string_view source, uint32_t begin, uint32_t end, std::vector<Diagnostic>& diags)
      : src_(source), pos_(begin), end_(end), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      Token t = next_token();
      bool eof = t.kind == Tok::Eof;
      out.push_back(std::move(t));
      if (eof) break;
    }
    return out;
  }

 private:
  char cur() const { return pos_ < end_ ? src_[pos_] : '\0'; }
  char peek(uint32_t n = 1) const { return pos_ + n < end_ ? src_[pos_ + n] : '\0'; }
  bool at_end() const { return pos_ >= end_; }

  void error(uint32_t lo, uint32_t hi, std::string msg) {
    diags_.push_back({Diagnostic::Severity::Error, {lo, hi}, std::move(msg)});
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = cur();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        pos_++;
      } else if (c == '/' && peek() == '/') {
        while (!at_end() && cur() != '\n') pos_++;
      } else {
        break;
      }
    }
  }

  Token make(Tok kind, uint32_t lo) {
    Token t;
    t.kind = kind;
    t.span = {lo, pos_};
    return t;
  }

  Token next_token() {
    if (at_end()) return make(Tok::Eof, pos_);
    uint32_t lo = pos_;
    char c = cur();

    if (is_letter(c)) return lex_ident(lo);
    if (is_digit(c)) return lex_int(lo, false);
    if (c == '-' && is_digit(peek())) {
      pos_++;
      return lex_int(lo, true);
    }
    if (c == '"') return lex_string(lo);
    if (c == '/' && peek() != '/') return lex_path(lo, false);
    if (c == '.' && peek() == '/') return lex_path(lo, true);

    pos_++;
    switch (c) {
      case '{': return make(Tok::LBrace, lo);
      case '}': return make(Tok::RBrace, lo);
      case '(': return make(Tok::LParen, lo);
      case ')': return make(Tok::RParen, lo);
      case '[': return make(Tok::LBracket, lo);
      case ']': return make(Tok::RBracket, lo);
      case ',': return make(Tok::Comma, lo);
      case ';': return make(Tok::Semi, lo);
      case ':': return make(Tok::Colon, lo);
      case '+': return make(Tok::Plus, lo);
      case '?': return make(Tok::Question, lo);
      case '*': return make(Tok::Star, lo);
      case '.': return make(Tok::Dot, lo);
      case '#': return make(Tok::HashSign, lo);
      case '=':
        if (cur() == '=') {
          pos_++;
          return make(Tok::EqEq, lo);
        }
        return make(Tok::Assign, lo);
      case '!':
        if (cur() == '=') {
          pos_++;
          return make(Tok::NotEq, lo);
        }
        return make(Tok::Bang, lo);
      case '&':
        if (cur() == '&') {
          pos_++;
          return make(Tok::AndAnd, lo);
        }
        error(lo, pos_, "stray '&' (use '&&')");
        return next_token();
      case '|':
        if (cur() == '|') {
          pos_++;
          return make(Tok::OrOr, lo);
        }
        return make(Tok::Pipe, lo);
      case '<':
        if (cur() == '-') {
          pos_++;
          return make(Tok::LArrow, lo);
        }
        error(lo, pos_, "stray '<'");
        return next_token();
      case '-':
        if (cur() == '>') {
          pos_++;
          return make(Tok::Arrow, lo);
        }
        error(lo, pos_, "stray '-'");
        return next_token();
      default:
        error(lo, pos_, std::string("unexpected character '") + c + "'");
        return next_token();
    }
  }

  Token lex_ident(uint32_t lo) {
    pos_++;
    while (!at_end()) {
      char c = cur();
      if (is_ident_char(c)) {
        pos_++;
      } else if (c == '-' && (is_ident_char(peek()))) {
        // '-' joins identifier parts only when followed by a word character;
        // "a-b" is one identifier, "a -3" is not.
        pos_ += 2;
      } else {
        break;
      }
    }
    std::string_view text = src_.substr(lo, pos_ - lo);
    Token t = make(Tok::Ident, lo);
    auto it = keywords().find(text);
    if (it != keywords().end()) {
      t.kind = it->second;
    } else {
      t.text = std::string(text);
    }
    return t;
  }

  Token lex_int(uint32_t lo, bool negative) {
    uint32_t digits_lo = pos_;
    while (!at_end() && is_digit(cur())) pos_++;
    std::string digits(src_.substr(digits_lo, pos_ - digits_lo));
    Token t = make(Tok::IntLit, lo);
    errno = 0;
    std::string full = negative ? "-" + digits : digits;
    char* endp = nullptr;
    long long v = strtoll(full.c_str(), &endp, 10);
    if (errno == ERANGE || endp != full.c_str() + full.size()) {
      error(lo, pos_, "integer literal out of 64-bit range");
      v = 0;
    }
    t.int_value = v;
    return t;
  }

  // Skips a balanced `${ ... }` interpolation body starting after the '{';
  // returns the offset of the closing '}'. Nested strings are respected.
  uint32_t skip_interp_expr() {
    int depth = 1;
    while (!at_end()) {
      char c = cur();
      if (c == '"') {
        pos_++;
        skip_string_raw();
      } else if (c == '{') {
        depth++;
        pos_++;
      } else if (c == '}') {
        depth--;
        if (depth == 0) return pos_;
        pos_++;
      } else {
        pos_++;
      }
    }
    return pos_;
  }

  void skip_string_raw() {
    while (!at_end()) {
      char c = cur();
      if (c == '\\') {
        pos_ += 2;
      } else if (c == '$' && peek() == '{') {
        pos_ += 2;
        skip_interp_expr();
        if (!at_end()) pos_++;  // closing '}'
      } else if (c == '"') {
        pos_++;
        return;
      } else if (c == '\n') {
        return;
      } else {
        pos_++;
      }
    }
  }

  void push_text(std::vector<TokenPart>& parts, std::string& text) {
    if (!text.empty()) {
      parts.emplace_back(std::move(text));
      text.clear();
    }
  }

  // Shared interpolation handling for strings and paths. Returns true when
  // it consumed an interpolation at the current '$'.
  bool lex_interpolation(std::vector<TokenPart>& parts, std::string& text) {
    uint32_t dollar = pos_;
    if (peek() == '{') {
      pos_ += 2;
      uint32_t inner_lo = pos_;
      uint32_t inner_hi = skip_interp_expr();
      if (at_end()) {
        error(dollar, pos_, "unterminated '${' interpolation");
      } else {
        pos_++;  // '}'
      }
      push_text(parts, text);
      parts.emplace_back(InterpExpr{{inner_lo, inner_hi}});
      return true;
    }
    if (is_letter(peek())) {
      pos_++;
      uint32_t id_lo = pos_;
      pos_++;
      while (!at_end() &&
             (is_ident_char(cur()) || (cur() == '-' && is_ident_char(peek()))))
        pos_ += (cur() == '-') ? 2 : 1;
      push_text(parts, text);
      parts.emplace_back(InterpId{std::string(src_.substr(id_lo, pos_ - id_lo)), {id_lo, pos_}});
      return true;
    }
    error(dollar, dollar + 1, "lone '$' in literal (escape as '\\$')");
    pos_++;
    text += '$';
    return false;
  }

  Token lex_string(uint32_t lo) {
    pos_++;  // opening quote
    std::vector<TokenPart> parts;
    std::string text;
    while (true) {
      if (at_end() || cur() == '\n' || cur() == '\r') {
        error(lo, pos_, "unterminated string literal");
        break;
      }
      char c = cur();
      if (c == '"') {
        pos_++;
        break;
      }
      if (c == '\\') {
        char e = peek();
        pos_ += 2;
        switch (e) {
          case '"': text += '"'; break;
          case '\\': text += '\\'; break;
          case '$': text += '$'; break;
          case 'n': text += '\n'; break;
          case 'r': text += '\r'; break;
          case 't': text += '\t'; break;
          default:
            error(pos_ - 2, pos_, "unknown escape sequence");
            text += e;
        }
        continue;
      }
      if (c == '$') {
        lex_interpolation(parts, text);
        continue;
      }
      text += c;
      pos_++;
    }
    push_text(parts, text);
    Token t = make(Tok::StrLit, lo);
    t.parts = std::move(parts);
    return t;
  }

  static bool path_char(char c) {
    switch (c) {
      case '\n':
      case '\r':
      case '$':
      case ',':
      case ';':
      case '}':
      case '{':
      case ' ':
      case '\t':
      case ']':
      case ')':
      case '"':
      case '\0':
        return false;
      default:
        return true;
    }
  }

  Token lex_path(uint32_t lo, bool relative) {
    pos_ += relative ? 2 : 1;  // "./" or "/"
    std::vector<TokenPart> parts;
    std::string text;
    while (!at_end()) {
      char c = cur();
      if (c == '\\' && (peek() == ' ' || peek() == '$' || peek() == '\\')) {
        text += peek();
        pos_ += 2;
        continue;
      }
      if (c == '$') {
        lex_interpolation(parts, text);
        continue;
      }
      if (!path_char(c)) break;
      text += c;
      pos_++;
    }
    push_text(parts, text);
    Token t = make(Tok::PathLit, lo);
    t.parts = std::move(parts);
    t.path_relative = relative;
    return t;
  }

  std::string_view src_;
  uint32_t pos_;
  uint32_t end_;
  std::vector<Diagnostic>& diags_;
};

}  // namespace

std::vector<Token> lex(std::string_view source, uint32_t begin, uint32_t end,
                       std::vector<Diagnostic>& diags) {
  return LexerImpl(source, begin, end, diags).run();
}

bool is_valid_identifier(std::string_view s) {
  if (s.empty() || !is_letter(s[0])) return false;
  if (keywords().contains(s)) return false;
  for (size_t i = 1; i < s.size(); i++) {
    char c = s[i];
    if (is_ident_char(c)) continue;
    if (c == '-' && i + 1 < s.size() && is_ident_char(s[i + 1])) continue;
    return false;
  }
  return true;
}

}  // namespace pie
