#include "pie/ast.hpp"

namespace pie::ast {

const char* binary_op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Or: return "||";
    case BinaryOp::And: return "&&";
    case BinaryOp::Add: return "+";
  }
  return "?";
}

namespace {

bool eq(const Expr& a, const Expr& b);

bool eq(const TypeExpr& a, const TypeExpr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* n = std::get_if<TypeExpr::Named>(&a.node))
    return n->name == std::get<TypeExpr::Named>(b.node).name;
  if (auto* o = std::get_if<TypeExpr::Optional>(&a.node))
    return eq(*o->inner, *std::get<TypeExpr::Optional>(b.node).inner);
  if (auto* l = std::get_if<TypeExpr::List>(&a.node))
    return eq(*l->inner, *std::get<TypeExpr::List>(b.node).inner);
  if (auto* t = std::get_if<TypeExpr::Tuple>(&a.node)) {
    auto& u = std::get<TypeExpr::Tuple>(b.node);
    if (t->elems.size() != u.elems.size()) return false;
    for (size_t i = 0; i < t->elems.size(); i++)
      if (!eq(*t->elems[i], *u.elems[i])) return false;
    return true;
  }
  return true;  // nullary alternatives
}

bool eq_opt_type(const std::optional<TypeExprPtr>& a, const std::optional<TypeExprPtr>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || eq(**a, **b);
}

bool eq(const Bind& a, const Bind& b) { return a.name == b.name && eq_opt_type(a.type, b.type); }

bool eq(const Binder& a, const Binder& b) {
  if (a.tuple != b.tuple || a.binds.size() != b.binds.size()) return false;
  for (size_t i = 0; i < a.binds.size(); i++)
    if (!eq(a.binds[i], b.binds[i])) return false;
  return true;
}

bool eq_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++)
    if (!eq(*a[i], *b[i])) return false;
  return true;
}

bool eq_parts(const std::vector<InterpPart>& a, const std::vector<InterpPart>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++) {
    if (a[i].index() != b[i].index()) return false;
    if (auto* s = std::get_if<std::string>(&a[i])) {
      if (*s != std::get<std::string>(b[i])) return false;
    } else if (!eq(*std::get<ExprPtr>(a[i]), *std::get<ExprPtr>(b[i]))) {
      return false;
    }
  }
  return true;
}

bool eq_filter(const std::optional<FilterExpr>& a, const std::optional<FilterExpr>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->name == b->name && eq(*a->arg, *b->arg));
}

bool eq_opt_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a != !b) return false;
  return !a || eq(*a, *b);
}

bool eq(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Expr::Block>) {
          return eq_exprs(na.stmts, nb.stmts);
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          return eq(*na.operand, *nb.operand);
        } else if constexpr (std::is_same_v<T, Expr::NonNull>) {
          return eq(*na.operand, *nb.operand);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return na.op == nb.op && eq(*na.lhs, *nb.lhs) && eq(*na.rhs, *nb.rhs);
        } else if constexpr (std::is_same_v<T, Expr::If>) {
          return eq(*na.cond, *nb.cond) && eq(*na.then_branch, *nb.then_branch) &&
                 eq_opt_expr(na.else_branch, nb.else_branch);
        } else if constexpr (std::is_same_v<T, Expr::Comprehension>) {
          if (na.gens.size() != nb.gens.size() || !eq(*na.body, *nb.body)) return false;
          for (size_t i = 0; i < na.gens.size(); i++) {
            if (!eq(na.gens[i].binder, nb.gens[i].binder) ||
                !eq(*na.gens[i].source, *nb.gens[i].source))
              return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Expr::ValDecl>) {
          return eq(na.binder, nb.binder) && eq(*na.rhs, *nb.rhs);
        } else if constexpr (std::is_same_v<T, Expr::Ref>) {
          return na.name == nb.name;
        } else if constexpr (std::is_same_v<T, Expr::Call>) {
          return na.name == nb.name && eq_exprs(na.args, nb.args);
        } else if constexpr (std::is_same_v<T, Expr::MethodCall>) {
          return na.name == nb.name && eq(*na.recv, *nb.recv) && eq_exprs(na.args, nb.args);
        } else if constexpr (std::is_same_v<T, Expr::Requires>) {
          return eq(*na.path, *nb.path) && eq_filter(na.filter, nb.filter) &&
                 na.stamper == nb.stamper;
        } else if constexpr (std::is_same_v<T, Expr::Generates>) {
          return eq(*na.path, *nb.path) && na.stamper == nb.stamper;
        } else if constexpr (std::is_same_v<T, Expr::ExistsOp>) {
          return eq(*na.path, *nb.path);
        } else if constexpr (std::is_same_v<T, Expr::ReadOp>) {
          return eq(*na.path, *nb.path);
        } else if constexpr (std::is_same_v<T, Expr::ListOp>) {
          return eq(*na.path, *nb.path) && eq_filter(na.filter, nb.filter);
        } else if constexpr (std::is_same_v<T, Expr::WalkOp>) {
          return eq(*na.path, *nb.path) && eq_filter(na.filter, nb.filter);
        } else if constexpr (std::is_same_v<T, Expr::Return>) {
          return eq(*na.value, *nb.value);
        } else if constexpr (std::is_same_v<T, Expr::Fail>) {
          return eq(*na.message, *nb.message);
        } else if constexpr (std::is_same_v<T, Expr::BoolLit>) {
          return na.value == nb.value;
        } else if constexpr (std::is_same_v<T, Expr::IntLit>) {
          return na.value == nb.value;
        } else if constexpr (std::is_same_v<T, Expr::TupleLit>) {
          return eq_exprs(na.elems, nb.elems);
        } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
          return eq_exprs(na.elems, nb.elems);
        } else if constexpr (std::is_same_v<T, Expr::StrInterp>) {
          return eq_parts(na.parts, nb.parts);
        } else if constexpr (std::is_same_v<T, Expr::PathLit>) {
          return na.relative == nb.relative && eq_parts(na.parts, nb.parts);
        } else {
          return true;  // UnitLit, NullLit
        }
      },
      a.node);
}

bool eq(const FuncHead& a, const FuncHead& b) {
  if (a.name != b.name || a.params.size() != b.params.size() || !eq(*a.ret, *b.ret)) return false;
  for (size_t i = 0; i < a.params.size(); i++) {
    if (a.params[i].name != b.params[i].name || !eq(*a.params[i].type, *b.params[i].type))
      return false;
  }
  return true;
}

}  // namespace

bool equal(const TypeExpr& a, const TypeExpr& b) { return eq(a, b); }
bool equal(const Expr& a, const Expr& b) { return eq(a, b); }

bool equal(const Program& a, const Program& b) {
  if (a.defs.size() != b.defs.size()) return false;
  for (size_t i = 0; i < a.defs.size(); i++) {
    if (a.defs[i].index() != b.defs[i].index()) return false;
    if (auto* fa = std::get_if<FuncDef>(&a.defs[i])) {
      const auto& fb = std::get<FuncDef>(b.defs[i]);
      if (!eq(fa->head, fb.head)) return false;
      if (fa->foreign_binding != fb.foreign_binding) return false;
      if (fa->foreign_java_qid != fb.foreign_java_qid) return false;
      if (!eq_opt_expr(fa->body, fb.body)) return false;
    } else {
      const auto& da = std::get<DataDef>(a.defs[i]);
      const auto& db = std::get<DataDef>(b.defs[i]);
      if (da.name != db.name || da.super != db.super || da.binding != db.binding) return false;
      if (da.methods.size() != db.methods.size()) return false;
      for (size_t j = 0; j < da.methods.size(); j++)
        if (!eq(da.methods[j], db.methods[j])) return false;
    }
  }
  return true;
}

}  // namespace pie::ast
