#include "pie/check.hpp"

#include <functional>
#include <set>
#include <sstream>

#include "pie/errors.hpp"

namespace pie {

using namespace ast;

Type Type::optional(Type inner) {
  // t?? collapses to t?; null stays null (assignable to any optional).
  if (inner.kind() == Kind::Optional || inner.kind() == Kind::Null || inner.kind() == Kind::Error)
    return inner;
  Type t(Kind::Optional);
  t.elems_.push_back(std::move(inner));
  return t;
}

bool Type::operator==(const Type& o) const {
  if (kind_ != o.kind_) return false;
  if (kind_ == Kind::Data) return name_ == o.name_;
  if (elems_.size() != o.elems_.size()) return false;
  for (size_t i = 0; i < elems_.size(); i++)
    if (elems_[i] != o.elems_[i]) return false;
  return true;
}

std::string Type::show() const {
  switch (kind_) {
    case Kind::Unit: return "unit";
    case Kind::Bool: return "bool";
    case Kind::Int: return "int";
    case Kind::Str: return "string";
    case Kind::Path: return "path";
    case Kind::Data: return name_;
    case Kind::Optional: {
      const Type& in = inner();
      if (in.kind() == Kind::Tuple) return "(" + in.show() + ")?";
      return in.show() + "?";
    }
    case Kind::List: {
      const Type& in = inner();
      if (in.kind() == Kind::Tuple) return "(" + in.show() + ")*";
      return in.show() + "*";
    }
    case Kind::Tuple: {
      std::string s = "(";
      for (size_t i = 0; i < elems_.size(); i++) {
        if (i) s += ", ";
        s += elems_[i].show();
      }
      return s + ")";
    }
    case Kind::Null: return "null";
    case Kind::Error: return "<error>";
  }
  return "?";
}

namespace {

// Optional(Null) has no dedicated representation; Type::optional handles the
// collapses. Special Optional with no element = optional of unknown (from
// `null` in optional position); only produced transiently.

struct Scope {
  Scope* parent = nullptr;
  std::map<std::string, Type> bindings;

  const Type* lookup(const std::string& name) const {
    for (const Scope* s = this; s; s = s->parent) {
      auto it = s->bindings.find(name);
      if (it != s->bindings.end()) return &it->second;
    }
    return nullptr;
  }
  bool defined_here(const std::string& name) const { return bindings.contains(name); }
};

class Checker {
 public:
  explicit Checker(Program program) : tp_(std::make_shared<TypedProgram>()) {
    tp_->program = std::move(program);
  }

  CheckResult run() {
    collect_defs();
    for (const Program::Def& def : tp_->program.defs) {
      if (auto* f = std::get_if<FuncDef>(&def)) check_func(*f);
    }
    CheckResult result;
    bool has_error = false;
    for (const Diagnostic& d : diags_)
      if (d.severity == Diagnostic::Severity::Error) has_error = true;
    result.diagnostics = std::move(diags_);
    if (!has_error) result.typed = tp_;
    return result;
  }

 private:
  void error(Span span, std::string msg) {
    diags_.push_back({Diagnostic::Severity::Error, span, std::move(msg)});
  }

  Type resolve_type(const TypeExpr& t) {
    return std::visit(
        [&](const auto& n) -> Type {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, TypeExpr::Unit>) return Type::unit();
          else if constexpr (std::is_same_v<T, TypeExpr::Bool>) return Type::boolean();
          else if constexpr (std::is_same_v<T, TypeExpr::Int>) return Type::integer();
          else if constexpr (std::is_same_v<T, TypeExpr::Str>) return Type::str();
          else if constexpr (std::is_same_v<T, TypeExpr::Path>) return Type::path();
          else if constexpr (std::is_same_v<T, TypeExpr::Named>) {
            if (!tp_->data_table.contains(n.name)) {
              error(t.span, "unknown type '" + n.name + "'");
              return Type::error();
            }
            return Type::data(n.name);
          } else if constexpr (std::is_same_v<T, TypeExpr::Optional>) {
            return Type::optional(resolve_type(*n.inner));
          } else if constexpr (std::is_same_v<T, TypeExpr::List>) {
            return Type::list(resolve_type(*n.inner));
          } else {
            std::vector<Type> elems;
            for (const TypeExprPtr& e : n.elems) elems.push_back(resolve_type(*e));
            return Type::tuple(std::move(elems));
          }
        },
        t.node);
  }

  void collect_defs() {
    std::set<std::string> names;
    // Data types first so function signatures can reference them in any order.
    for (const Program::Def& def : tp_->program.defs) {
      if (auto* d = std::get_if<DataDef>(&def)) {
        if (!names.insert(d->name).second) {
          error(d->span, "duplicate definition of '" + d->name + "'");
          continue;
        }
        DataInfo info;
        info.name = d->name;
        info.super = d->super;
        info.binding = d->binding;
        tp_->data_table[d->name] = std::move(info);
      }
    }
    for (const Program::Def& def : tp_->program.defs) {
      if (auto* d = std::get_if<DataDef>(&def)) {
        auto it = tp_->data_table.find(d->name);
        if (it == tp_->data_table.end()) continue;
        if (d->super && !tp_->data_table.contains(*d->super))
          error(d->span, "unknown supertype '" + *d->super + "'");
        for (const FuncHead& m : d->methods) {
          if (it->second.methods.contains(m.name)) {
            error(m.span, "duplicate method '" + m.name + "' in data type '" + d->name + "'");
            continue;
          }
          std::vector<Type> params;
          std::set<std::string> param_names;
          for (const Param& p : m.params) {
            if (!param_names.insert(p.name).second)
              error(p.span, "duplicate parameter '" + p.name + "'");
            params.push_back(resolve_type(*p.type));
          }
          it->second.methods.insert_or_assign(
              m.name, std::make_pair(std::move(params), resolve_type(*m.ret)));
        }
      } else {
        const auto& f = std::get<FuncDef>(def);
        if (!names.insert(f.head.name).second) {
          error(f.span, "duplicate definition of '" + f.head.name + "'");
          continue;
        }
        FuncInfo info;
        info.name = f.head.name;
        std::set<std::string> param_names;
        for (const Param& p : f.head.params) {
          if (!param_names.insert(p.name).second)
            error(p.span, "duplicate parameter '" + p.name + "'");
          info.params.push_back(resolve_type(*p.type));
        }
        info.ret = resolve_type(*f.head.ret);
        info.is_foreign = f.foreign_binding.has_value();
        if (info.is_foreign) info.foreign_binding = *f.foreign_binding;
        tp_->func_table[f.head.name] = std::move(info);
      }
    }
  }

  void check_func(const FuncDef& f) {
    if (f.foreign_binding) return;
    auto it = tp_->func_table.find(f.head.name);
    if (it == tp_->func_table.end()) return;  // duplicate; already diagnosed
    const FuncInfo& info = it->second;

    Scope scope;
    for (size_t i = 0; i < f.head.params.size() && i < info.params.size(); i++)
      scope.bindings.insert_or_assign(f.head.params[i].name, info.params[i]);
    current_ret_ = info.ret;

    // The body block shares the parameter scope: vals there may not shadow
    // parameters, while nested blocks may.
    body_block_ = f.body ? &*f.body : nullptr;
    Type body = check_expr(*f.body, scope, info.ret);
    if (!assignable(body, info.ret)) {
      error(f.body->span, "function '" + f.head.name + "' declared to return " + info.ret.show() +
                              " but body has type " + body.show());
    }
  }

  // True when a value of type `from` can be used where `to` is expected.
  bool assignable(const Type& from, const Type& to) {
    if (from.is_error() || to.is_error()) return true;
    if (from == to) return true;
    if (from.kind() == Type::Kind::Null)
      return to.kind() == Type::Kind::Optional || to.kind() == Type::Kind::Null;
    if (to.kind() == Type::Kind::Optional && from.kind() == Type::Kind::Optional)
      return assignable(from.inner(), to.inner());
    if (from.kind() == Type::Kind::Data && to.kind() == Type::Kind::Data)
      return is_subtype_data(from.data_name(), to.data_name());
    if (from.kind() == Type::Kind::List && to.kind() == Type::Kind::List)
      return assignable(from.inner(), to.inner());
    if (from.kind() == Type::Kind::Tuple && to.kind() == Type::Kind::Tuple) {
      if (from.elems().size() != to.elems().size()) return false;
      for (size_t i = 0; i < from.elems().size(); i++)
        if (!assignable(from.elems()[i], to.elems()[i])) return false;
      return true;
    }
    return false;
  }

  bool is_subtype_data(const std::string& sub, const std::string& super) {
    std::string cur = sub;
    for (int hops = 0; hops < 64; hops++) {
      if (cur == super) return true;
      auto it = tp_->data_table.find(cur);
      if (it == tp_->data_table.end() || !it->second.super) return false;
      cur = *it->second.super;
    }
    return false;
  }

  // Least common type of two branches; nullopt when they do not unify.
  std::optional<Type> unify(const Type& a, const Type& b) {
    if (a.is_error()) return b;
    if (b.is_error()) return a;
    if (a == b) return a;
    if (a.kind() == Type::Kind::Null && b.kind() == Type::Kind::Null) return Type::null();
    if (a.kind() == Type::Kind::Null) return Type::optional(b);
    if (b.kind() == Type::Kind::Null) return Type::optional(a);
    if (a.kind() == Type::Kind::Optional || b.kind() == Type::Kind::Optional) {
      Type ia = a.kind() == Type::Kind::Optional ? a.inner() : a;
      Type ib = b.kind() == Type::Kind::Optional ? b.inner() : b;
      auto u = unify(ia, ib);
      if (!u) return std::nullopt;
      return Type::optional(*u);
    }
    if (a.kind() == Type::Kind::Data && b.kind() == Type::Kind::Data) {
      if (is_subtype_data(a.data_name(), b.data_name())) return b;
      if (is_subtype_data(b.data_name(), a.data_name())) return a;
      return std::nullopt;
    }
    if (a.kind() == Type::Kind::List && b.kind() == Type::Kind::List) {
      auto u = unify(a.inner(), b.inner());
      if (!u) return std::nullopt;
      return Type::list(*u);
    }
    if (a.kind() == Type::Kind::Tuple && b.kind() == Type::Kind::Tuple &&
        a.elems().size() == b.elems().size()) {
      std::vector<Type> elems;
      for (size_t i = 0; i < a.elems().size(); i++) {
        auto u = unify(a.elems()[i], b.elems()[i]);
        if (!u) return std::nullopt;
        elems.push_back(*u);
      }
      return Type::tuple(std::move(elems));
    }
    return std::nullopt;
  }

  Type record(const Expr& e, Type t) {
    tp_->types.insert_or_assign(&e, t);
    return t;
  }

  void bind(Scope& scope, const Bind& b, Type inferred) {
    Type t = inferred;
    if (b.type) {
      Type declared = resolve_type(**b.type);
      if (!assignable(inferred, declared)) {
        error(b.span, "binding '" + b.name + "' declared as " + declared.show() +
                          " but initialized with " + inferred.show());
      }
      t = declared;
    } else if (t.kind() == Type::Kind::Null) {
      error(b.span, "cannot infer a type for '" + b.name + "' from a bare null; annotate it");
      t = Type::error();
    }
    if (scope.defined_here(b.name)) {
      error(b.span, "duplicate binding '" + b.name + "' in the same scope");
      return;
    }
    scope.bindings.insert_or_assign(b.name, std::move(t));
  }

  void bind_binder(Scope& scope, const Binder& binder, const Type& rhs, Span rhs_span) {
    if (!binder.tuple) {
      bind(scope, binder.binds[0], rhs);
      return;
    }
    if (rhs.is_error()) {
      for (const Bind& b : binder.binds) bind(scope, b, Type::error());
      return;
    }
    if (rhs.kind() != Type::Kind::Tuple || rhs.elems().size() != binder.binds.size()) {
      error(rhs_span, "tuple binder of arity " + std::to_string(binder.binds.size()) +
                          " does not match value of type " + rhs.show());
      for (const Bind& b : binder.binds) bind(scope, b, Type::error());
      return;
    }
    for (size_t i = 0; i < binder.binds.size(); i++)
      bind(scope, binder.binds[i], rhs.elems()[i]);
  }

  Type check_path_operand(const Expr& operand, Scope& scope, bool allow_list) {
    Type t = check_expr(operand, scope, std::nullopt);
    if (t.is_error()) return t;
    if (t.kind() == Type::Kind::Path) return t;
    if (allow_list && t.kind() == Type::Kind::List && t.inner().kind() == Type::Kind::Path)
      return t;
    error(operand.span, std::string("expected path") + (allow_list ? " or path*" : "") +
                            ", found " + t.show());
    return Type::error();
  }

  void check_filter(const std::optional<FilterExpr>& f, Scope& scope) {
    if (!f) return;
    bool wants_list = f->name == FilterName::Patterns || f->name == FilterName::Extensions;
    Type expected = wants_list ? Type::list(Type::str()) : Type::str();
    Type t = check_expr(*f->arg, scope, expected);
    if (!assignable(t, expected))
      error(f->arg->span, "filter argument must be " + expected.show() + ", found " + t.show());
  }

  Type check_expr(const Expr& e, Scope& scope, std::optional<Type> expected) {
    return record(e, check_expr_inner(e, scope, std::move(expected)));
  }

  Type check_expr_inner(const Expr& e, Scope& scope, std::optional<Type> expected) {
    return std::visit(
        [&](const auto& n) -> Type {
          using T = std::decay_t<decltype(n)>;

          if constexpr (std::is_same_v<T, Expr::Block>) {
            Scope inner;
            inner.parent = &scope;
            Scope& block_scope = (&e == body_block_) ? scope : inner;
            Type last = Type::unit();
            for (const ExprPtr& stmt : n.stmts) {
              bool is_last = &stmt == &n.stmts.back();
              last = check_expr(*stmt, block_scope, is_last ? expected : std::nullopt);
            }
            return n.stmts.empty() ? Type::unit() : last;

          } else if constexpr (std::is_same_v<T, Expr::Not>) {
            Type t = check_expr(*n.operand, scope, Type::boolean());
            if (!assignable(t, Type::boolean()))
              error(n.operand->span, "'!' needs a bool operand, found " + t.show());
            return Type::boolean();

          } else if constexpr (std::is_same_v<T, Expr::NonNull>) {
            Type t = check_expr(*n.operand, scope, std::nullopt);
            if (t.is_error()) return t;
            if (t.kind() != Type::Kind::Optional) {
              error(e.span, "'!' (non-null assertion) needs an optional operand, found " + t.show());
              return t;
            }
            return t.inner();

          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            switch (n.op) {
              case BinaryOp::Eq:
              case BinaryOp::Ne: {
                Type a = check_expr(*n.lhs, scope, std::nullopt);
                Type b = check_expr(*n.rhs, scope, a.kind() == Type::Kind::Null ? std::nullopt
                                                                                : std::optional(a));
                if (!unify(a, b))
                  error(e.span, "cannot compare " + a.show() + " with " + b.show());
                return Type::boolean();
              }
              case BinaryOp::And:
              case BinaryOp::Or: {
                Type a = check_expr(*n.lhs, scope, Type::boolean());
                Type b = check_expr(*n.rhs, scope, Type::boolean());
                if (!assignable(a, Type::boolean()) || !assignable(b, Type::boolean()))
                  error(e.span, std::string("'") + binary_op_text(n.op) +
                                    "' needs bool operands, found " + a.show() + " and " +
                                    b.show());
                return Type::boolean();
              }
              case BinaryOp::Add:
                return check_add(e, *n.lhs, *n.rhs, scope, expected);
            }
            return Type::error();

          } else if constexpr (std::is_same_v<T, Expr::If>) {
            Type c = check_expr(*n.cond, scope, Type::boolean());
            if (!assignable(c, Type::boolean()))
              error(n.cond->span, "if condition must be bool, found " + c.show());
            if (!n.else_branch) {
              check_expr(*n.then_branch, scope, std::nullopt);
              return Type::unit();
            }
            Type a = check_expr(*n.then_branch, scope, expected);
            Type b = check_expr(*n.else_branch, scope, expected);
            auto u = unify(a, b);
            if (!u) {
              error(e.span, "if branches have incompatible types " + a.show() + " and " + b.show());
              return Type::error();
            }
            return *u;

          } else if constexpr (std::is_same_v<T, Expr::Comprehension>) {
            std::optional<Type> body_expected;
            if (expected && expected->kind() == Type::Kind::List)
              body_expected = expected->inner();
            Scope inner;
            inner.parent = &scope;
            for (const Expr::Comprehension::Gen& gen : n.gens) {
              Type src = check_expr(*gen.source, inner, std::nullopt);
              Type elem = Type::error();
              if (src.kind() == Type::Kind::List) {
                elem = src.inner();
              } else if (!src.is_error()) {
                error(gen.source->span, "comprehension source must be a list, found " + src.show());
              }
              bind_binder(inner, gen.binder, elem, gen.source->span);
            }
            Type body = check_expr(*n.body, inner, body_expected);
            return Type::list(body);

          } else if constexpr (std::is_same_v<T, Expr::ValDecl>) {
            std::optional<Type> rhs_expected;
            if (!n.binder.tuple && n.binder.binds[0].type)
              rhs_expected = resolve_type(**n.binder.binds[0].type);
            Type rhs = check_expr(*n.rhs, scope, rhs_expected);
            bind_binder(scope, n.binder, rhs, n.rhs->span);
            return Type::unit();

          } else if constexpr (std::is_same_v<T, Expr::Ref>) {
            if (const Type* t = scope.lookup(n.name)) return *t;
            error(e.span, "unresolved reference '" + n.name + "'");
            return Type::error();

          } else if constexpr (std::is_same_v<T, Expr::Call>) {
            auto it = tp_->func_table.find(n.name);
            if (it == tp_->func_table.end()) {
              error(e.span, "call to undefined function '" + n.name + "'");
              for (const ExprPtr& a : n.args) check_expr(*a, scope, std::nullopt);
              return Type::error();
            }
            const FuncInfo& fi = it->second;
            if (n.args.size() != fi.params.size()) {
              error(e.span, "function '" + n.name + "' expects " +
                                std::to_string(fi.params.size()) + " argument(s), got " +
                                std::to_string(n.args.size()));
              for (const ExprPtr& a : n.args) check_expr(*a, scope, std::nullopt);
              return fi.ret;
            }
            for (size_t i = 0; i < n.args.size(); i++) {
              Type a = check_expr(*n.args[i], scope, fi.params[i]);
              if (!assignable(a, fi.params[i]))
                error(n.args[i]->span, "argument " + std::to_string(i + 1) + " of '" + n.name +
                                           "' must be " + fi.params[i].show() + ", found " +
                                           a.show());
            }
            return fi.ret;

          } else if constexpr (std::is_same_v<T, Expr::MethodCall>) {
            Type recv = check_expr(*n.recv, scope, std::nullopt);
            return check_method(e, recv, n, scope);

          } else if constexpr (std::is_same_v<T, Expr::Requires>) {
            check_path_operand(*n.path, scope, true);
            check_filter(n.filter, scope);
            return Type::unit();

          } else if constexpr (std::is_same_v<T, Expr::Generates>) {
            check_path_operand(*n.path, scope, false);
            return Type::unit();

          } else if constexpr (std::is_same_v<T, Expr::ExistsOp>) {
            check_path_operand(*n.path, scope, false);
            return Type::boolean();

          } else if constexpr (std::is_same_v<T, Expr::ReadOp>) {
            check_path_operand(*n.path, scope, false);
            return Type::str();

          } else if constexpr (std::is_same_v<T, Expr::ListOp>) {
            check_path_operand(*n.path, scope, false);
            check_filter(n.filter, scope);
            return Type::list(Type::path());

          } else if constexpr (std::is_same_v<T, Expr::WalkOp>) {
            check_path_operand(*n.path, scope, false);
            check_filter(n.filter, scope);
            return Type::list(Type::path());

          } else if constexpr (std::is_same_v<T, Expr::Return>) {
            Type v = check_expr(*n.value, scope, current_ret_);
            if (current_ret_ && !assignable(v, *current_ret_))
              error(e.span, "return value must be " + current_ret_->show() + ", found " + v.show());
            return expected.value_or(Type::error());  // bottom: adopts any expectation

          } else if constexpr (std::is_same_v<T, Expr::Fail>) {
            Type m = check_expr(*n.message, scope, Type::str());
            if (!assignable(m, Type::str()))
              error(n.message->span, "fail message must be string, found " + m.show());
            return expected.value_or(Type::error());  // bottom

          } else if constexpr (std::is_same_v<T, Expr::UnitLit>) {
            return Type::unit();
          } else if constexpr (std::is_same_v<T, Expr::BoolLit>) {
            return Type::boolean();
          } else if constexpr (std::is_same_v<T, Expr::IntLit>) {
            return Type::integer();
          } else if constexpr (std::is_same_v<T, Expr::NullLit>) {
            if (expected && expected->kind() == Type::Kind::Optional) return *expected;
            return Type::null();

          } else if constexpr (std::is_same_v<T, Expr::TupleLit>) {
            std::vector<Type> elems;
            bool use_expected = expected && expected->kind() == Type::Kind::Tuple &&
                                expected->elems().size() == n.elems.size();
            for (size_t i = 0; i < n.elems.size(); i++) {
              std::optional<Type> ee;
              if (use_expected) ee = expected->elems()[i];
              elems.push_back(check_expr(*n.elems[i], scope, ee));
            }
            return Type::tuple(std::move(elems));

          } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
            std::optional<Type> elem_expected;
            if (expected && expected->kind() == Type::Kind::List)
              elem_expected = expected->inner();
            if (n.elems.empty()) {
              if (elem_expected) return Type::list(*elem_expected);
              error(e.span, "cannot infer the element type of an empty list here");
              return Type::error();
            }
            Type elem = check_expr(*n.elems[0], scope, elem_expected);
            for (size_t i = 1; i < n.elems.size(); i++) {
              Type t = check_expr(*n.elems[i], scope, elem_expected ? elem_expected
                                                                    : std::optional(elem));
              auto u = unify(elem, t);
              if (!u) {
                error(n.elems[i]->span, "list elements must share one type; found " + elem.show() +
                                            " and " + t.show());
                elem = Type::error();
              } else {
                elem = *u;
              }
            }
            if (elem.kind() == Type::Kind::Null) {
              error(e.span, "cannot infer an element type from a list of nulls");
              return Type::error();
            }
            return Type::list(elem);

          } else if constexpr (std::is_same_v<T, Expr::StrInterp>) {
            for (const InterpPart& p : n.parts)
              if (auto* sub = std::get_if<ExprPtr>(&p)) check_expr(**sub, scope, std::nullopt);
            return Type::str();

          } else if constexpr (std::is_same_v<T, Expr::PathLit>) {
            for (const InterpPart& p : n.parts)
              if (auto* sub = std::get_if<ExprPtr>(&p)) check_expr(**sub, scope, std::nullopt);
            return Type::path();
          } else {
            return Type::error();
          }
        },
        e.node);
  }

  Type check_add(const Expr& e, const Expr& lhs, const Expr& rhs, Scope& scope,
                 const std::optional<Type>& expected) {
    std::optional<Type> lhs_expected;
    if (expected &&
        (expected->kind() == Type::Kind::List || expected->kind() == Type::Kind::Int ||
         expected->kind() == Type::Kind::Str || expected->kind() == Type::Kind::Path))
      lhs_expected = expected;
    Type a = check_expr(lhs, scope, lhs_expected);
    std::optional<Type> rhs_expected;
    if (a.kind() == Type::Kind::Int || a.kind() == Type::Kind::Str ||
        a.kind() == Type::Kind::List)
      rhs_expected = a;
    else if (a.kind() == Type::Kind::Path)
      rhs_expected = Type::str();
    Type b = check_expr(rhs, scope, rhs_expected);
    if (a.is_error() || b.is_error()) return Type::error();

    using K = Type::Kind;
    if (a.kind() == K::Int && b.kind() == K::Int) return Type::integer();
    if (a.kind() == K::Str && b.kind() == K::Str) return Type::str();
    if (a.kind() == K::Path && b.kind() == K::Str) return Type::path();
    if (a.kind() == K::List && b.kind() == K::List) {
      auto u = unify(a.inner(), b.inner());
      if (u) return Type::list(*u);
    }
    if (a.kind() == K::List) {
      auto u = unify(a.inner(), b);
      if (u && assignable(b, a.inner())) return Type::list(*u);  // append
    }
    error(e.span, "no '+' for operand types " + a.show() + " and " + b.show());
    return Type::error();
  }

  Type check_method(const Expr& e, const Type& recv, const Expr::MethodCall& n, Scope& scope) {
    auto check_args_against = [&](const std::vector<Type>& params, const Type& ret,
                                  const std::string& where) -> Type {
      if (n.args.size() != params.size()) {
        error(e.span, "method '" + n.name + "' of " + where + " expects " +
                          std::to_string(params.size()) + " argument(s), got " +
                          std::to_string(n.args.size()));
        for (const ExprPtr& a : n.args) check_expr(*a, scope, std::nullopt);
        return ret;
      }
      for (size_t i = 0; i < n.args.size(); i++) {
        Type a = check_expr(*n.args[i], scope, params[i]);
        if (!assignable(a, params[i]))
          error(n.args[i]->span, "argument " + std::to_string(i + 1) + " of '" + n.name +
                                     "' must be " + params[i].show() + ", found " + a.show());
      }
      return ret;
    };

    if (recv.is_error()) {
      for (const ExprPtr& a : n.args) check_expr(*a, scope, std::nullopt);
      return Type::error();
    }

    if (recv.kind() == Type::Kind::Path) {
      if (n.name == "replaceExtension")
        return check_args_against({Type::str()}, Type::path(), "path");
      error(e.span, "unknown method '" + n.name + "' on path");
      for (const ExprPtr& a : n.args) check_expr(*a, scope, std::nullopt);
      return Type::error();
    }

    if (recv.kind() == Type::Kind::Data) {
      std::string cur = recv.data_name();
      for (int hops = 0; hops < 64; hops++) {
        auto it = tp_->data_table.find(cur);
        if (it == tp_->data_table.end()) break;
        auto mit = it->second.methods.find(n.name);
        if (mit != it->second.methods.end())
          return check_args_against(mit->second.first, mit->second.second, recv.data_name());
        if (!it->second.super) break;
        cur = *it->second.super;
      }
      error(e.span, "unknown method '" + n.name + "' on data type " + recv.data_name());
      for (const ExprPtr& a : n.args) check_expr(*a, scope, std::nullopt);
      return Type::error();
    }

    error(e.span, "type " + recv.show() + " has no methods");
    for (const ExprPtr& a : n.args) check_expr(*a, scope, std::nullopt);
    return Type::error();
  }

  std::shared_ptr<TypedProgram> tp_;
  std::vector<Diagnostic> diags_;
  std::optional<Type> current_ret_;
  const Expr* body_block_ = nullptr;
};

}  // namespace

CheckResult check(Program program) { return Checker(std::move(program)).run(); }

std::pair<std::vector<Type>, Type> entry_signature(const TypedProgram& tp,
                                                   const std::string& func) {
  auto it = tp.func_table.find(func);
  if (it == tp.func_table.end()) throw UnknownFunctionError(func);
  return {it->second.params, it->second.ret};
}

}  // namespace pie
