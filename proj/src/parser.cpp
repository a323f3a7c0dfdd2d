#include "pie/parser.hpp"

#include <cassert>

#include "lexer.hpp"

namespace pie {

using namespace ast;

namespace {

constexpr int kMaxDepth = 160;

struct ParseAbort {};  // unwinds a single definition; recovery resumes at the next one

class Parser {
 public:
  Parser(std::string_view source, uint32_t begin, uint32_t end, std::vector<Diagnostic>& diags)
      : source_(source), diags_(diags) {
    tokens_ = lex(source, begin, end, diags);
  }

  Program parse_program(std::string origin) {
    Program p;
    p.origin = std::move(origin);
    while (!at(Tok::Eof)) {
      size_t before = pos_;
      try {
        if (at(Tok::KwFunc)) {
          p.defs.emplace_back(parse_func_def());
        } else if (at(Tok::KwData)) {
          p.defs.emplace_back(parse_data_def());
        } else {
          error_here("expected 'func' or 'data' definition");
          throw ParseAbort{};
        }
      } catch (ParseAbort&) {
        sync_to_next_def(before);
      }
    }
    return p;
  }

  // Parses a single expression covering the whole input (interpolations,
  // CLI literals).
  ExprPtr parse_standalone_expr() {
    ExprPtr e;
    try {
      e = parse_expr();
      if (!at(Tok::Eof)) error_here("unexpected trailing input after expression");
    } catch (ParseAbort&) {
      return nullptr;
    }
    return e;
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }
  const Token& peek(size_t n = 1) const {
    size_t i = pos_ + n;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }
  Token advance() { return tokens_[pos_ == tokens_.size() - 1 ? pos_ : pos_++]; }

  void error_here(std::string msg) {
    diags_.push_back({Diagnostic::Severity::Error, cur().span, std::move(msg)});
  }

  Token expect(Tok k, const char* what) {
    if (!at(k)) {
      error_here(std::string("expected ") + what + ", found " + tok_name(cur().kind));
      throw ParseAbort{};
    }
    return advance();
  }

  void sync_to_next_def(size_t before) {
    if (pos_ == before && !at(Tok::Eof)) pos_++;  // guarantee progress
    int depth = 0;
    while (!at(Tok::Eof)) {
      Tok k = cur().kind;
      if (k == Tok::LBrace || k == Tok::LParen || k == Tok::LBracket) depth++;
      if (k == Tok::RBrace || k == Tok::RParen || k == Tok::RBracket) depth = std::max(0, depth - 1);
      if (depth == 0 && (k == Tok::KwFunc || k == Tok::KwData)) return;
      pos_++;
    }
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& p_) : p(p_) {
      if (++p.depth_ > kMaxDepth) {
        p.error_here("expression nesting too deep");
        throw ParseAbort{};
      }
    }
    ~DepthGuard() { p.depth_--; }
  };

  // ---- definitions ----

  FuncDef parse_func_def() {
    uint32_t lo = cur().span.lo;
    expect(Tok::KwFunc, "'func'");
    FuncDef def;
    def.head = parse_func_head();
    expect(Tok::Assign, "'='");
    if (at(Tok::KwForeign)) {
      advance();
      if (at(Tok::Ident) && cur().text == "java" && peek().kind == Tok::Ident) {
        advance();
        std::string qid = expect(Tok::Ident, "qualified identifier").text;
        while (at(Tok::Dot)) {
          advance();
          qid += "." + expect(Tok::Ident, "identifier").text;
        }
        def.foreign_java_qid = qid;
        expect(Tok::HashSign, "'#'");
        def.foreign_binding = expect(Tok::Ident, "binding identifier").text;
      } else {
        def.foreign_binding = expect(Tok::Ident, "binding identifier").text;
      }
    } else {
      def.body = parse_expr();
    }
    def.span = {lo, prev_hi()};
    return def;
  }

  FuncHead parse_func_head() {
    FuncHead head;
    uint32_t lo = cur().span.lo;
    head.name = expect(Tok::Ident, "function name").text;
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      while (true) {
        Param param;
        uint32_t plo = cur().span.lo;
        param.name = expect(Tok::Ident, "parameter name").text;
        expect(Tok::Colon, "':'");
        param.type = parse_type();
        param.span = {plo, prev_hi()};
        head.params.push_back(std::move(param));
        if (at(Tok::Comma)) {
          advance();
          continue;
        }
        break;
      }
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Arrow, "'->'");
    head.ret = parse_type();
    head.span = {lo, prev_hi()};
    return head;
  }

  DataDef parse_data_def() {
    uint32_t lo = cur().span.lo;
    expect(Tok::KwData, "'data'");
    DataDef def;
    def.name = expect(Tok::Ident, "data type name").text;
    if (at(Tok::Colon)) {
      advance();
      def.super = expect(Tok::Ident, "supertype name").text;
    }
    expect(Tok::KwForeign, "'foreign'");
    Token java = expect(Tok::Ident, "'java'");
    if (java.text != "java") {
      diags_.push_back({Diagnostic::Severity::Error, java.span, "expected 'java' after 'foreign'"});
      throw ParseAbort{};
    }
    def.binding = expect(Tok::Ident, "binding identifier").text;
    expect(Tok::LBrace, "'{'");
    while (at(Tok::KwFunc)) {
      advance();
      def.methods.push_back(parse_func_head());
    }
    expect(Tok::RBrace, "'}'");
    def.span = {lo, prev_hi()};
    return def;
  }

  // ---- types ----

  TypeExprPtr parse_type() {
    DepthGuard g(*this);
    auto t = std::make_unique<TypeExpr>();
    uint32_t lo = cur().span.lo;
    switch (cur().kind) {
      case Tok::KwUnit: advance(); t->node = TypeExpr::Unit{}; break;
      case Tok::KwBool: advance(); t->node = TypeExpr::Bool{}; break;
      case Tok::KwInt: advance(); t->node = TypeExpr::Int{}; break;
      case Tok::KwString: advance(); t->node = TypeExpr::Str{}; break;
      case Tok::KwPath: advance(); t->node = TypeExpr::Path{}; break;
      case Tok::Ident: t->node = TypeExpr::Named{advance().text}; break;
      case Tok::LParen: {
        advance();
        std::vector<TypeExprPtr> elems;
        elems.push_back(parse_type());
        while (at(Tok::Comma)) {
          advance();
          elems.push_back(parse_type());
        }
        expect(Tok::RParen, "')'");
        if (elems.size() == 1) {
          t = std::move(elems[0]);  // grouping
        } else {
          t->node = TypeExpr::Tuple{std::move(elems)};
        }
        break;
      }
      default:
        error_here(std::string("expected a type, found ") + tok_name(cur().kind));
        throw ParseAbort{};
    }
    while (at(Tok::Question) || at(Tok::Star)) {
      bool opt = at(Tok::Question);
      advance();
      auto wrapped = std::make_unique<TypeExpr>();
      if (opt)
        wrapped->node = TypeExpr::Optional{std::move(t)};
      else
        wrapped->node = TypeExpr::List{std::move(t)};
      t = std::move(wrapped);
    }
    t->span = {lo, prev_hi()};
    return t;
  }

  // ---- expressions ----
  // Precedence, loosest to tightest:
  //   val / if
  //   requires / generates / exists / read / list / walk / return / fail
  //   ||
  //   &&
  //   == / !=
  //   +
  //   prefix !
  //   postfix ! / method call / call
  //   primary

  ExprPtr parse_expr() {
    DepthGuard g(*this);
    uint32_t lo = cur().span.lo;
    if (at(Tok::KwVal)) {
      advance();
      auto e = std::make_unique<Expr>();
      Binder binder = parse_binder();
      expect(Tok::Assign, "'='");
      ExprPtr rhs = parse_expr();
      e->node = Expr::ValDecl{std::move(binder), std::move(rhs)};
      e->span = {lo, prev_hi()};
      return e;
    }
    if (at(Tok::KwIf)) {
      advance();
      expect(Tok::LParen, "'('");
      ExprPtr cond = parse_expr();
      expect(Tok::RParen, "')'");
      ExprPtr then_branch = parse_expr();
      ExprPtr else_branch;
      if (at(Tok::KwElse)) {
        advance();
        else_branch = parse_expr();
      }
      auto e = std::make_unique<Expr>();
      e->node = Expr::If{std::move(cond), std::move(then_branch), std::move(else_branch)};
      e->span = {lo, prev_hi()};
      return e;
    }
    return parse_keyword_op();
  }

  std::optional<FilterExpr> parse_opt_filter() {
    if (!at(Tok::KwWith)) return std::nullopt;
    advance();
    FilterName name;
    Token t = expect(Tok::Ident, "filter kind (regex, pattern[s], extension[s])");
    if (t.text == "regex") name = FilterName::Regex;
    else if (t.text == "pattern") name = FilterName::Pattern;
    else if (t.text == "patterns") name = FilterName::Patterns;
    else if (t.text == "extension") name = FilterName::Extension;
    else if (t.text == "extensions") name = FilterName::Extensions;
    else {
      diags_.push_back({Diagnostic::Severity::Error, t.span,
                        "unknown filter kind '" + t.text + "'"});
      throw ParseAbort{};
    }
    FilterExpr f{name, parse_or()};
    return f;
  }

  std::optional<StamperName> parse_opt_stamper() {
    if (!at(Tok::KwBy)) return std::nullopt;
    advance();
    if (at(Tok::KwExists)) {
      advance();
      return StamperName::Exists;
    }
    Token t = expect(Tok::Ident, "stamper (exists, modified, hash)");
    if (t.text == "modified") return StamperName::Modified;
    if (t.text == "hash") return StamperName::Hash;
    diags_.push_back({Diagnostic::Severity::Error, t.span, "unknown stamper '" + t.text + "'"});
    throw ParseAbort{};
  }

  ExprPtr parse_keyword_op() {
    DepthGuard g(*this);
    uint32_t lo = cur().span.lo;
    auto e = std::make_unique<Expr>();
    switch (cur().kind) {
      case Tok::KwRequires: {
        advance();
        ExprPtr path = parse_or();
        auto filter = parse_opt_filter();
        auto stamper = parse_opt_stamper();
        e->node = Expr::Requires{std::move(path), std::move(filter), stamper};
        break;
      }
      case Tok::KwGenerates: {
        advance();
        ExprPtr path = parse_or();
        auto stamper = parse_opt_stamper();
        e->node = Expr::Generates{std::move(path), stamper};
        break;
      }
      case Tok::KwExists: {
        advance();
        e->node = Expr::ExistsOp{parse_or()};
        break;
      }
      case Tok::KwRead: {
        advance();
        e->node = Expr::ReadOp{parse_or()};
        break;
      }
      case Tok::KwList: {
        advance();
        ExprPtr path = parse_or();
        auto filter = parse_opt_filter();
        e->node = Expr::ListOp{std::move(path), std::move(filter)};
        break;
      }
      case Tok::KwWalk: {
        advance();
        ExprPtr path = parse_or();
        auto filter = parse_opt_filter();
        e->node = Expr::WalkOp{std::move(path), std::move(filter)};
        break;
      }
      case Tok::KwReturn: {
        advance();
        e->node = Expr::Return{parse_or()};
        break;
      }
      case Tok::KwFail: {
        advance();
        e->node = Expr::Fail{parse_or()};
        break;
      }
      default:
        return parse_or();
    }
    e->span = {lo, prev_hi()};
    return e;
  }

  ExprPtr parse_or() { return parse_binary_level(0); }

  ExprPtr parse_binary_level(int level) {
    DepthGuard g(*this);
    // level 0: ||, 1: &&, 2: == !=, 3: +
    if (level == 4) return parse_prefix();
    uint32_t lo = cur().span.lo;
    ExprPtr lhs = parse_binary_level(level + 1);
    while (true) {
      BinaryOp op;
      if (level == 0 && at(Tok::OrOr)) op = BinaryOp::Or;
      else if (level == 1 && at(Tok::AndAnd)) op = BinaryOp::And;
      else if (level == 2 && at(Tok::EqEq)) op = BinaryOp::Eq;
      else if (level == 2 && at(Tok::NotEq)) op = BinaryOp::Ne;
      else if (level == 3 && at(Tok::Plus)) op = BinaryOp::Add;
      else break;
      advance();
      ExprPtr rhs = parse_binary_level(level + 1);
      auto e = std::make_unique<Expr>();
      e->node = Expr::Binary{op, std::move(lhs), std::move(rhs)};
      e->span = {lo, prev_hi()};
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr parse_prefix() {
    DepthGuard g(*this);
    if (at(Tok::Bang)) {
      uint32_t lo = cur().span.lo;
      advance();
      ExprPtr operand = parse_prefix();
      auto e = std::make_unique<Expr>();
      e->node = Expr::Not{std::move(operand)};
      e->span = {lo, prev_hi()};
      return e;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    DepthGuard g(*this);
    uint32_t lo = cur().span.lo;
    ExprPtr e = parse_primary();
    while (true) {
      if (at(Tok::Bang)) {
        advance();
        auto n = std::make_unique<Expr>();
        n->node = Expr::NonNull{std::move(e)};
        n->span = {lo, prev_hi()};
        e = std::move(n);
      } else if (at(Tok::Dot) && peek().kind == Tok::Ident && peek(2).kind == Tok::LParen) {
        advance();
        std::string name = advance().text;
        std::vector<ExprPtr> args = parse_call_args();
        auto n = std::make_unique<Expr>();
        n->node = Expr::MethodCall{std::move(e), std::move(name), std::move(args)};
        n->span = {lo, prev_hi()};
        e = std::move(n);
      } else {
        break;
      }
    }
    return e;
  }

  std::vector<ExprPtr> parse_call_args() {
    expect(Tok::LParen, "'('");
    std::vector<ExprPtr> args;
    if (!at(Tok::RParen)) {
      args.push_back(parse_expr());
      while (at(Tok::Comma)) {
        advance();
        args.push_back(parse_expr());
      }
    }
    expect(Tok::RParen, "')'");
    return args;
  }

  ExprPtr parse_primary() {
    DepthGuard g(*this);
    uint32_t lo = cur().span.lo;
    auto e = std::make_unique<Expr>();
    switch (cur().kind) {
      case Tok::KwUnit:
        advance();
        e->node = Expr::UnitLit{};
        break;
      case Tok::KwTrue:
        advance();
        e->node = Expr::BoolLit{true};
        break;
      case Tok::KwFalse:
        advance();
        e->node = Expr::BoolLit{false};
        break;
      case Tok::KwNull:
        advance();
        e->node = Expr::NullLit{};
        break;
      case Tok::IntLit:
        e->node = Expr::IntLit{advance().int_value};
        break;
      case Tok::StrLit: {
        Token t = advance();
        e->node = Expr::StrInterp{convert_parts(std::move(t.parts))};
        break;
      }
      case Tok::PathLit: {
        Token t = advance();
        e->node = Expr::PathLit{t.path_relative, convert_parts(std::move(t.parts))};
        break;
      }
      case Tok::Ident: {
        std::string name = advance().text;
        if (at(Tok::LParen)) {
          e->node = Expr::Call{std::move(name), parse_call_args()};
        } else {
          e->node = Expr::Ref{std::move(name)};
        }
        break;
      }
      case Tok::LParen: {
        advance();
        std::vector<ExprPtr> elems;
        elems.push_back(parse_expr());
        while (at(Tok::Comma)) {
          advance();
          elems.push_back(parse_expr());
        }
        expect(Tok::RParen, "')'");
        if (elems.size() == 1) {
          e = std::move(elems[0]);  // grouping
          return e;
        }
        e->node = Expr::TupleLit{std::move(elems)};
        break;
      }
      case Tok::LBracket: {
        advance();
        if (at(Tok::RBracket)) {
          advance();
          e->node = Expr::ListLit{{}};
          break;
        }
        ExprPtr first = parse_expr();
        if (at(Tok::Pipe)) {
          advance();
          std::vector<Expr::Comprehension::Gen> gens;
          while (true) {
            Binder binder = parse_binder();
            expect(Tok::LArrow, "'<-'");
            ExprPtr source = parse_keyword_op();
            gens.push_back({std::move(binder), std::move(source)});
            if (at(Tok::Comma)) {
              advance();
              continue;
            }
            break;
          }
          expect(Tok::RBracket, "']'");
          e->node = Expr::Comprehension{std::move(first), std::move(gens)};
          break;
        }
        std::vector<ExprPtr> elems;
        elems.push_back(std::move(first));
        while (at(Tok::Comma)) {
          advance();
          elems.push_back(parse_expr());
        }
        expect(Tok::RBracket, "']'");
        e->node = Expr::ListLit{std::move(elems)};
        break;
      }
      case Tok::LBrace: {
        advance();
        std::vector<ExprPtr> stmts;
        if (!at(Tok::RBrace)) {
          stmts.push_back(parse_expr());
          while (at(Tok::Semi)) {
            advance();
            if (at(Tok::RBrace)) break;  // trailing ';'
            stmts.push_back(parse_expr());
          }
        }
        expect(Tok::RBrace, "'}'");
        e->node = Expr::Block{std::move(stmts)};
        break;
      }
      default:
        error_here(std::string("expected an expression, found ") + tok_name(cur().kind));
        throw ParseAbort{};
    }
    e->span = {lo, prev_hi()};
    return e;
  }

  Binder parse_binder() {
    Binder b;
    uint32_t lo = cur().span.lo;
    if (at(Tok::LParen)) {
      advance();
      b.tuple = true;
      b.binds.push_back(parse_bind());
      while (at(Tok::Comma)) {
        advance();
        b.binds.push_back(parse_bind());
      }
      expect(Tok::RParen, "')'");
    } else {
      b.binds.push_back(parse_bind());
    }
    b.span = {lo, prev_hi()};
    return b;
  }

  Bind parse_bind() {
    Bind bind;
    uint32_t lo = cur().span.lo;
    bind.name = expect(Tok::Ident, "binding name").text;
    if (at(Tok::Colon)) {
      advance();
      bind.type = parse_type();
    }
    bind.span = {lo, prev_hi()};
    return bind;
  }

  std::vector<InterpPart> convert_parts(std::vector<TokenPart> parts) {
    std::vector<InterpPart> out;
    out.reserve(parts.size());
    for (TokenPart& p : parts) {
      if (auto* text = std::get_if<std::string>(&p)) {
        out.emplace_back(std::move(*text));
      } else if (auto* id = std::get_if<InterpId>(&p)) {
        auto ref = std::make_unique<Expr>();
        ref->node = Expr::Ref{id->name};
        ref->span = id->span;
        out.emplace_back(std::move(ref));
      } else {
        auto& raw = std::get<InterpExpr>(p);
        Parser sub(source_, raw.span.lo, raw.span.hi, diags_);
        ExprPtr sube = sub.parse_standalone_expr();
        if (!sube) {
          // Error already reported; substitute a placeholder.
          sube = std::make_unique<Expr>();
          sube->node = Expr::UnitLit{};
          sube->span = raw.span;
        }
        out.emplace_back(std::move(sube));
      }
    }
    return out;
  }

  uint32_t prev_hi() const { return pos_ > 0 ? tokens_[pos_ - 1].span.hi : cur().span.hi; }

  std::string_view source_;
  std::vector<Diagnostic>& diags_;
  std::vector<Token> tokens_;
  size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

ParseResult parse_program(std::string_view source, std::string origin) {
  ParseResult result;
  Parser parser(source, 0, static_cast<uint32_t>(source.size()), result.diagnostics);
  Program p = parser.parse_program(std::move(origin));
  bool has_error = false;
  for (const Diagnostic& d : result.diagnostics)
    if (d.severity == Diagnostic::Severity::Error) has_error = true;
  if (!has_error) result.program = std::move(p);
  return result;
}

ParseExprResult parse_expression(std::string_view source) {
  ParseExprResult result;
  Parser parser(source, 0, static_cast<uint32_t>(source.size()), result.diagnostics);
  ExprPtr e = parser.parse_standalone_expr();
  bool has_error = false;
  for (const Diagnostic& d : result.diagnostics)
    if (d.severity == Diagnostic::Severity::Error) has_error = true;
  if (!has_error) result.expr = std::move(e);
  return result;
}

}  // namespace pie
