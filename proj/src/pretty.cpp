#include <sstream>

#include "pie/parser.hpp"

namespace pie {

using namespace ast;

namespace {

// Precedence levels, loosest to tightest; printing a child whose level is
// below the context's minimum wraps it in parentheses.
enum Level : int {
  kStmt = 0,     // val, if
  kKeyword = 1,  // requires, generates, exists, read, list, walk, return, fail
  kOr = 2,
  kAnd = 3,
  kEq = 4,
  kAdd = 5,
  kPrefix = 6,
  kPostfix = 7,
  kPrimary = 8,
};

int level_of(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::ValDecl> || std::is_same_v<T, Expr::If>)
          return kStmt;
        else if constexpr (std::is_same_v<T, Expr::Requires> ||
                           std::is_same_v<T, Expr::Generates> ||
                           std::is_same_v<T, Expr::ExistsOp> || std::is_same_v<T, Expr::ReadOp> ||
                           std::is_same_v<T, Expr::ListOp> || std::is_same_v<T, Expr::WalkOp> ||
                           std::is_same_v<T, Expr::Return> || std::is_same_v<T, Expr::Fail>)
          return kKeyword;
        else if constexpr (std::is_same_v<T, Expr::Binary>)
          return 0;  // resolved by caller via op
        else if constexpr (std::is_same_v<T, Expr::Not>)
          return kPrefix;
        else if constexpr (std::is_same_v<T, Expr::NonNull> ||
                           std::is_same_v<T, Expr::MethodCall>)
          return kPostfix;
        else
          return kPrimary;
      },
      e.node);
}

int binary_level(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return kOr;
    case BinaryOp::And: return kAnd;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return kEq;
    case BinaryOp::Add: return kAdd;
  }
  return kAdd;
}

// True when `e` ends in an `if` without `else` in rightmost position, so a
// following `else` token would bind into it on reparse.
bool ends_open_if(const Expr& e) {
  if (auto* i = std::get_if<Expr::If>(&e.node))
    return i->else_branch ? ends_open_if(*i->else_branch) : true;
  if (auto* v = std::get_if<Expr::ValDecl>(&e.node)) return ends_open_if(*v->rhs);
  return false;
}

class Printer {
 public:
  std::string print_program(const Program& p) {
    std::ostringstream os;
    bool first = true;
    for (const Program::Def& def : p.defs) {
      if (!first) os << "\n";
      first = false;
      if (auto* f = std::get_if<FuncDef>(&def))
        print_func(os, *f);
      else
        print_data(os, std::get<DataDef>(def));
      os << "\n";
    }
    return os.str();
  }

  std::string print_expr_str(const Expr& e) {
    std::ostringstream os;
    print(os, e, kStmt, 0);
    return os.str();
  }

  std::string print_type_str(const TypeExpr& t) {
    std::ostringstream os;
    print_type(os, t);
    return os.str();
  }

 private:
  void print_func(std::ostringstream& os, const FuncDef& f) {
    os << "func ";
    print_head(os, f.head);
    os << " = ";
    if (f.foreign_binding) {
      os << "foreign ";
      if (f.foreign_java_qid) os << "java " << *f.foreign_java_qid << " # ";
      os << *f.foreign_binding;
    } else {
      print(os, *f.body, kStmt, 0);
    }
  }

  void print_head(std::ostringstream& os, const FuncHead& h) {
    os << h.name << "(";
    for (size_t i = 0; i < h.params.size(); i++) {
      if (i) os << ", ";
      os << h.params[i].name << ": ";
      print_type(os, *h.params[i].type);
    }
    os << ") -> ";
    print_type(os, *h.ret);
  }

  void print_data(std::ostringstream& os, const DataDef& d) {
    os << "data " << d.name;
    if (d.super) os << " : " << *d.super;
    os << " foreign java " << d.binding << " {";
    if (d.methods.empty()) {
      os << "}";
      return;
    }
    os << "\n";
    for (const FuncHead& m : d.methods) {
      os << "  func ";
      print_head(os, m);
      os << "\n";
    }
    os << "}";
  }

  void print_type(std::ostringstream& os, const TypeExpr& t) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, TypeExpr::Unit>) os << "unit";
          else if constexpr (std::is_same_v<T, TypeExpr::Bool>) os << "bool";
          else if constexpr (std::is_same_v<T, TypeExpr::Int>) os << "int";
          else if constexpr (std::is_same_v<T, TypeExpr::Str>) os << "string";
          else if constexpr (std::is_same_v<T, TypeExpr::Path>) os << "path";
          else if constexpr (std::is_same_v<T, TypeExpr::Named>) os << n.name;
          else if constexpr (std::is_same_v<T, TypeExpr::Optional>) {
            print_type(os, *n.inner);
            os << "?";
          } else if constexpr (std::is_same_v<T, TypeExpr::List>) {
            print_type(os, *n.inner);
            os << "*";
          } else {
            os << "(";
            for (size_t i = 0; i < n.elems.size(); i++) {
              if (i) os << ", ";
              print_type(os, *n.elems[i]);
            }
            os << ")";
          }
        },
        t.node);
  }

  static std::string escape_str(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '$': out += "\\$"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
      }
    }
    return out;
  }

  static std::string escape_path(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == ' ' || c == '$' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  }

  void print_interp_parts(std::ostringstream& os, const std::vector<InterpPart>& parts,
                          bool path, int indent) {
    for (const InterpPart& p : parts) {
      if (auto* text = std::get_if<std::string>(&p)) {
        os << (path ? escape_path(*text) : escape_str(*text));
      } else {
        const ExprPtr& e = std::get<ExprPtr>(p);
        os << "${";
        print(os, *e, kStmt, indent);
        os << "}";
      }
    }
  }

  void print(std::ostringstream& os, const Expr& e, int min_level, int indent) {
    int lvl = level_of(e);
    if (auto* b = std::get_if<Expr::Binary>(&e.node)) lvl = binary_level(b->op);
    bool parens = lvl < min_level;
    if (parens) os << "(";
    print_node(os, e, indent);
    if (parens) os << ")";
  }

  void print_node(std::ostringstream& os, const Expr& e, int indent) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Expr::Block>) {
            if (n.stmts.empty()) {
              os << "{}";
              return;
            }
            os << "{\n";
            std::string pad((indent + 1) * 2, ' ');
            for (size_t i = 0; i < n.stmts.size(); i++) {
              os << pad;
              print(os, *n.stmts[i], kStmt, indent + 1);
              if (i + 1 < n.stmts.size()) os << ";";
              os << "\n";
            }
            os << std::string(indent * 2, ' ') << "}";
          } else if constexpr (std::is_same_v<T, Expr::Not>) {
            os << "!";
            print(os, *n.operand, kPrefix, indent);
          } else if constexpr (std::is_same_v<T, Expr::NonNull>) {
            // A path literal would lex the trailing '!' into its text.
            print(os, *n.operand,
                  std::holds_alternative<Expr::PathLit>(n.operand->node) ? kPrimary + 1 : kPostfix,
                  indent);
            os << "!";
          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            int lvl = binary_level(n.op);
            print(os, *n.lhs, lvl, indent);
            os << " " << binary_op_text(n.op) << " ";
            print(os, *n.rhs, lvl + 1, indent);
          } else if constexpr (std::is_same_v<T, Expr::If>) {
            os << "if(";
            print(os, *n.cond, kStmt, indent);
            os << ") ";
            // Parenthesize a then-branch ending in an open `if`, otherwise
            // our `else` would bind to it on reparse.
            bool guard = n.else_branch && ends_open_if(*n.then_branch);
            if (guard) os << "(";
            print(os, *n.then_branch, kStmt, indent);
            if (guard) os << ")";
            if (n.else_branch) {
              os << " else ";
              print(os, *n.else_branch, kStmt, indent);
            }
          } else if constexpr (std::is_same_v<T, Expr::Comprehension>) {
            os << "[";
            print(os, *n.body, kStmt, indent);
            os << " | ";
            for (size_t i = 0; i < n.gens.size(); i++) {
              if (i) os << ", ";
              print_binder(os, n.gens[i].binder);
              os << " <- ";
              print(os, *n.gens[i].source, kKeyword, indent);
            }
            os << "]";
          } else if constexpr (std::is_same_v<T, Expr::ValDecl>) {
            os << "val ";
            print_binder(os, n.binder);
            os << " = ";
            print(os, *n.rhs, kStmt, indent);
          } else if constexpr (std::is_same_v<T, Expr::Ref>) {
            os << n.name;
          } else if constexpr (std::is_same_v<T, Expr::Call>) {
            os << n.name << "(";
            for (size_t i = 0; i < n.args.size(); i++) {
              if (i) os << ", ";
              print(os, *n.args[i], kStmt, indent);
            }
            os << ")";
          } else if constexpr (std::is_same_v<T, Expr::MethodCall>) {
            // A path literal would lex the '.' into its text.
            print(os, *n.recv,
                  std::holds_alternative<Expr::PathLit>(n.recv->node) ? kPrimary + 1 : kPostfix,
                  indent);
            os << "." << n.name << "(";
            for (size_t i = 0; i < n.args.size(); i++) {
              if (i) os << ", ";
              print(os, *n.args[i], kStmt, indent);
            }
            os << ")";
          } else if constexpr (std::is_same_v<T, Expr::Requires>) {
            os << "requires ";
            print(os, *n.path, kOr, indent);
            print_filter(os, n.filter, indent);
            print_stamper(os, n.stamper);
          } else if constexpr (std::is_same_v<T, Expr::Generates>) {
            os << "generates ";
            print(os, *n.path, kOr, indent);
            print_stamper(os, n.stamper);
          } else if constexpr (std::is_same_v<T, Expr::ExistsOp>) {
            os << "exists ";
            print(os, *n.path, kOr, indent);
          } else if constexpr (std::is_same_v<T, Expr::ReadOp>) {
            os << "read ";
            print(os, *n.path, kOr, indent);
          } else if constexpr (std::is_same_v<T, Expr::ListOp>) {
            os << "list ";
            print(os, *n.path, kOr, indent);
            print_filter(os, n.filter, indent);
          } else if constexpr (std::is_same_v<T, Expr::WalkOp>) {
            os << "walk ";
            print(os, *n.path, kOr, indent);
            print_filter(os, n.filter, indent);
          } else if constexpr (std::is_same_v<T, Expr::Return>) {
            os << "return ";
            print(os, *n.value, kOr, indent);
          } else if constexpr (std::is_same_v<T, Expr::Fail>) {
            os << "fail ";
            print(os, *n.message, kOr, indent);
          } else if constexpr (std::is_same_v<T, Expr::UnitLit>) {
            os << "unit";
          } else if constexpr (std::is_same_v<T, Expr::BoolLit>) {
            os << (n.value ? "true" : "false");
          } else if constexpr (std::is_same_v<T, Expr::IntLit>) {
            os << n.value;
          } else if constexpr (std::is_same_v<T, Expr::NullLit>) {
            os << "null";
          } else if constexpr (std::is_same_v<T, Expr::TupleLit>) {
            os << "(";
            for (size_t i = 0; i < n.elems.size(); i++) {
              if (i) os << ", ";
              print(os, *n.elems[i], kStmt, indent);
            }
            os << ")";
          } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
            os << "[";
            for (size_t i = 0; i < n.elems.size(); i++) {
              if (i) os << ", ";
              print(os, *n.elems[i], kStmt, indent);
            }
            os << "]";
          } else if constexpr (std::is_same_v<T, Expr::StrInterp>) {
            os << "\"";
            print_interp_parts(os, n.parts, false, indent);
            os << "\"";
          } else if constexpr (std::is_same_v<T, Expr::PathLit>) {
            os << (n.relative ? "./" : "/");
            print_interp_parts(os, n.parts, true, indent);
          }
        },
        e.node);
  }

  void print_binder(std::ostringstream& os, const Binder& b) {
    if (b.tuple) {
      os << "(";
      for (size_t i = 0; i < b.binds.size(); i++) {
        if (i) os << ", ";
        print_bind(os, b.binds[i]);
      }
      os << ")";
    } else {
      print_bind(os, b.binds[0]);
    }
  }

  void print_bind(std::ostringstream& os, const Bind& b) {
    os << b.name;
    if (b.type) {
      os << ": ";
      print_type(os, **b.type);
    }
  }

  void print_filter(std::ostringstream& os, const std::optional<FilterExpr>& f, int indent) {
    if (!f) return;
    os << " with ";
    switch (f->name) {
      case FilterName::Regex: os << "regex"; break;
      case FilterName::Pattern: os << "pattern"; break;
      case FilterName::Patterns: os << "patterns"; break;
      case FilterName::Extension: os << "extension"; break;
      case FilterName::Extensions: os << "extensions"; break;
    }
    os << " ";
    print(os, *f->arg, kOr, indent);
  }

  void print_stamper(std::ostringstream& os, const std::optional<StamperName>& s) {
    if (!s) return;
    os << " by ";
    switch (*s) {
      case StamperName::Exists: os << "exists"; break;
      case StamperName::Modified: os << "modified"; break;
      case StamperName::Hash: os << "hash"; break;
    }
  }
};

}  // namespace

std::string pretty_print(const Program& p) { return Printer().print_program(p); }
std::string pretty_print(const Expr& e) { return Printer().print_expr_str(e); }
std::string pretty_print(const TypeExpr& t) { return Printer().print_type_str(t); }

}  // namespace pie
