#include "pie/eval.hpp"

#include <algorithm>
#include <fstream>

#include "pie/process.hpp"

namespace fs = std::filesystem;

namespace pie {

using namespace ast;

std::shared_ptr<const ForeignObject> ForeignRegistry::decode_foreign(
    std::string_view type_name, std::span<const std::byte> payload) const {
  auto it = data_.find(std::string(type_name));
  if (it == data_.end() || !it->second.decode) return nullptr;
  return it->second.decode(payload);
}

Value pack_args(std::vector<Value> args) {
  if (args.empty()) return Value::unit();
  if (args.size() == 1) return std::move(args[0]);
  return Value::tuple(std::move(args));
}

bool value_conforms(const Value& v, const Type& t, const TypedProgram& tp) {
  using K = Type::Kind;
  switch (t.kind()) {
    case K::Error:
      return true;
    case K::Unit:
      return v.kind() == ValueKind::Unit;
    case K::Bool:
      return v.kind() == ValueKind::Bool;
    case K::Int:
      return v.kind() == ValueKind::Int;
    case K::Str:
      return v.kind() == ValueKind::Str;
    case K::Path:
      return v.kind() == ValueKind::Path;
    case K::Null:
      return v.is_null();
    case K::Optional:
      return v.is_null() || value_conforms(v, t.inner(), tp);
    case K::List: {
      if (v.kind() != ValueKind::List) return false;
      for (const Value& e : v.elems())
        if (!value_conforms(e, t.inner(), tp)) return false;
      return true;
    }
    case K::Tuple: {
      if (v.kind() != ValueKind::Tuple || v.elems().size() != t.elems().size()) return false;
      for (size_t i = 0; i < t.elems().size(); i++)
        if (!value_conforms(v.elems()[i], t.elems()[i], tp)) return false;
      return true;
    }
    case K::Data: {
      if (v.kind() != ValueKind::Foreign) return false;
      std::string cur(v.foreign_obj().type_name());
      for (int hops = 0; hops < 64; hops++) {
        if (cur == t.data_name()) return true;
        auto it = tp.data_table.find(cur);
        if (it == tp.data_table.end() || !it->second.super) return false;
        cur = *it->second.super;
      }
      return false;
    }
  }
  return false;
}

Value path_method(const Value& recv, const std::string& name, std::span<const Value> args) {
  if (name == "replaceExtension" && args.size() == 1) {
    const std::string& text = recv.path_text();
    std::string new_ext = args[0].as_str();
    size_t slash = text.find_last_of('/');
    size_t name_begin = slash == std::string::npos ? 0 : slash + 1;
    size_t dot = text.find_last_of('.');
    std::string base;
    if (dot != std::string::npos && dot > name_begin) {
      base = text.substr(0, dot);
    } else {
      base = text;  // no extension: append one
    }
    return Value::path(base + "." + new_ext);
  }
  throw UnknownMethodError("path", name);
}

namespace {

struct ReturnUnwind {
  Value value;
};

struct Env {
  Env* parent = nullptr;
  std::map<std::string, Value> bindings;

  const Value* lookup(const std::string& name) const {
    for (const Env* e = this; e; e = e->parent) {
      auto it = e->bindings.find(name);
      if (it != e->bindings.end()) return &it->second;
    }
    return nullptr;
  }
};

PathStamperKind to_stamper(StamperName n) {
  switch (n) {
    case StamperName::Exists:
      return PathStamperKind::Exists;
    case StamperName::Modified:
      return PathStamperKind::Modified;
    case StamperName::Hash:
      return PathStamperKind::Hash;
  }
  return PathStamperKind::Modified;
}

class Evaluator {
 public:
  Evaluator(const TypedProgram& tp, const ForeignRegistry& fr) : tp_(tp), fr_(fr) {}

  Value eval_func_body(const FuncDef& f, ExecContext& ctx, const Value& input) {
    Env env;
    const auto& params = f.head.params;
    if (params.size() == 1) {
      env.bindings[params[0].name] = input;
    } else if (params.size() >= 2) {
      if (input.kind() != ValueKind::Tuple || input.elems().size() != params.size())
        throw TaskFailedError("input of '" + f.head.name + "' does not match its parameters");
      for (size_t i = 0; i < params.size(); i++) env.bindings[params[i].name] = input.elems()[i];
    }
    try {
      return eval(*f.body, env, ctx);
    } catch (ReturnUnwind& r) {
      return std::move(r.value);
    }
  }

 private:
  Value eval(const Expr& e, Env& env, ExecContext& ctx) {
    return std::visit([&](const auto& n) -> Value { return eval_node(e, n, env, ctx); }, e.node);
  }

  Value eval_node(const Expr&, const Expr::Block& n, Env& env, ExecContext& ctx) {
    Env inner;
    inner.parent = &env;
    Value last = Value::unit();
    for (const ExprPtr& stmt : n.stmts) last = eval(*stmt, inner, ctx);
    return n.stmts.empty() ? Value::unit() : last;
  }

  Value eval_node(const Expr&, const Expr::Not& n, Env& env, ExecContext& ctx) {
    return Value::boolean(!eval(*n.operand, env, ctx).as_bool());
  }

  Value eval_node(const Expr&, const Expr::NonNull& n, Env& env, ExecContext& ctx) {
    Value v = eval(*n.operand, env, ctx);
    if (v.is_null()) throw NullAssertionError();
    return v;
  }

  Value eval_node(const Expr&, const Expr::Binary& n, Env& env, ExecContext& ctx) {
    switch (n.op) {
      case BinaryOp::Eq:
        return Value::boolean(eval(*n.lhs, env, ctx) == eval(*n.rhs, env, ctx));
      case BinaryOp::Ne:
        return Value::boolean(eval(*n.lhs, env, ctx) != eval(*n.rhs, env, ctx));
      case BinaryOp::And: {
        Value a = eval(*n.lhs, env, ctx);
        if (!a.as_bool()) return Value::boolean(false);
        return Value::boolean(eval(*n.rhs, env, ctx).as_bool());
      }
      case BinaryOp::Or: {
        Value a = eval(*n.lhs, env, ctx);
        if (a.as_bool()) return Value::boolean(true);
        return Value::boolean(eval(*n.rhs, env, ctx).as_bool());
      }
      case BinaryOp::Add:
        return eval_add(eval(*n.lhs, env, ctx), eval(*n.rhs, env, ctx));
    }
    throw PieError("unreachable binary op");
  }

  Value eval_add(const Value& a, const Value& b) {
    if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int) {
      int64_t out = 0;
      if (__builtin_add_overflow(a.as_int(), b.as_int(), &out)) throw IntOverflowError();
      return Value::integer(out);
    }
    if (a.kind() == ValueKind::Str && b.kind() == ValueKind::Str)
      return Value::str(a.as_str() + b.as_str());
    if (a.kind() == ValueKind::Path && b.kind() == ValueKind::Str)
      return Value::path(a.path_text() + b.as_str());
    if (a.kind() == ValueKind::List && b.kind() == ValueKind::List) {
      std::vector<Value> elems = a.elems();
      elems.insert(elems.end(), b.elems().begin(), b.elems().end());
      return Value::list(std::move(elems));
    }
    if (a.kind() == ValueKind::List) {  // append
      std::vector<Value> elems = a.elems();
      elems.push_back(b);
      return Value::list(std::move(elems));
    }
    throw TaskFailedError(std::string("no '+' for runtime values of kind ") +
                          kind_name(a.kind()) + " and " + kind_name(b.kind()));
  }

  Value eval_node(const Expr&, const Expr::If& n, Env& env, ExecContext& ctx) {
    bool c = eval(*n.cond, env, ctx).as_bool();
    if (c) return eval(*n.then_branch, env, ctx);
    if (n.else_branch) return eval(*n.else_branch, env, ctx);
    return Value::unit();
  }

  void bind_binder(Env& env, const Binder& binder, Value v) {
    if (!binder.tuple) {
      env.bindings[binder.binds[0].name] = std::move(v);
      return;
    }
    if (v.kind() != ValueKind::Tuple || v.elems().size() != binder.binds.size())
      throw TaskFailedError("tuple binder does not match value " + v.display());
    for (size_t i = 0; i < binder.binds.size(); i++)
      env.bindings[binder.binds[i].name] = v.elems()[i];
  }

  Value eval_node(const Expr&, const Expr::Comprehension& n, Env& env, ExecContext& ctx) {
    std::vector<Value> out;
    Env inner;
    inner.parent = &env;
    eval_comprehension(n, 0, inner, ctx, out);
    return Value::list(std::move(out));
  }

  void eval_comprehension(const Expr::Comprehension& n, size_t gen_index, Env& env,
                          ExecContext& ctx, std::vector<Value>& out) {
    if (gen_index == n.gens.size()) {
      out.push_back(eval(*n.body, env, ctx));
      return;
    }
    const auto& gen = n.gens[gen_index];
    Value src = eval(*gen.source, env, ctx);
    for (const Value& elem : src.elems()) {
      bind_binder(env, gen.binder, elem);
      eval_comprehension(n, gen_index + 1, env, ctx, out);
    }
  }

  Value eval_node(const Expr&, const Expr::ValDecl& n, Env& env, ExecContext& ctx) {
    bind_binder(env, n.binder, eval(*n.rhs, env, ctx));
    return Value::unit();
  }

  Value eval_node(const Expr& e, const Expr::Ref& n, Env& env, ExecContext&) {
    if (const Value* v = env.lookup(n.name)) return *v;
    throw PieError("internal: unresolved reference '" + n.name + "' at evaluation");
  }

  Value eval_node(const Expr&, const Expr::Call& n, Env& env, ExecContext& ctx) {
    std::vector<Value> args;
    args.reserve(n.args.size());
    for (const ExprPtr& a : n.args) args.push_back(eval(*a, env, ctx));

    auto it = tp_.func_table.find(n.name);
    if (it == tp_.func_table.end()) throw UnknownFunctionError(n.name);
    const FuncInfo& fi = it->second;
    if (fi.is_foreign) {
      const ForeignRegistry::FuncEntry* host = fr_.find_func(fi.foreign_binding);
      if (!host) throw UnresolvedForeignError(fi.foreign_binding);
      if (host->mode == CallMode::Inline) return host->fn(ctx, args).value;
    }
    TaskKey key{n.name, pack_args(std::move(args)).encode()};
    return ctx.require_call(key, OutputStamperKind::Equals);
  }

  Value eval_node(const Expr&, const Expr::MethodCall& n, Env& env, ExecContext& ctx) {
    Value recv = eval(*n.recv, env, ctx);
    std::vector<Value> args;
    args.reserve(n.args.size());
    for (const ExprPtr& a : n.args) args.push_back(eval(*a, env, ctx));

    if (recv.kind() == ValueKind::Path) return path_method(recv, n.name, args);
    if (recv.kind() != ValueKind::Foreign)
      throw TaskFailedError("value " + recv.display() + " has no methods");

    // Resolve along the declared supertype chain.
    std::string cur(recv.foreign_obj().type_name());
    for (int hops = 0; hops < 64; hops++) {
      if (const ForeignRegistry::DataDescriptor* d = fr_.find_data(cur)) {
        auto mit = d->methods.find(n.name);
        if (mit != d->methods.end()) return mit->second(recv, args);
      }
      auto dit = tp_.data_table.find(cur);
      if (dit == tp_.data_table.end() || !dit->second.super) break;
      cur = *dit->second.super;
    }
    throw UnknownMethodError(std::string(recv.foreign_obj().type_name()), n.name);
  }

  std::optional<Filter> eval_filter(const std::optional<FilterExpr>& f, Env& env,
                                    ExecContext& ctx) {
    if (!f) return std::nullopt;
    Value arg = eval(*f->arg, env, ctx);
    std::vector<std::string> args;
    if (arg.kind() == ValueKind::List) {
      for (const Value& v : arg.elems()) args.push_back(v.as_str());
    } else {
      args.push_back(arg.as_str());
    }
    FilterKind kind;
    switch (f->name) {
      case FilterName::Regex:
        kind = FilterKind::Regex;
        break;
      case FilterName::Pattern:
      case FilterName::Patterns:
        kind = FilterKind::Pattern;
        break;
      case FilterName::Extension:
      case FilterName::Extensions:
        kind = FilterKind::Extension;
        break;
    }
    return Filter::make(kind, std::move(args));
  }

  Value eval_node(const Expr&, const Expr::Requires& n, Env& env, ExecContext& ctx) {
    Value p = eval(*n.path, env, ctx);
    std::optional<Filter> filter = eval_filter(n.filter, env, ctx);
    PathStamperKind st = n.stamper ? to_stamper(*n.stamper) : PathStamperKind::Modified;
    if (p.kind() == ValueKind::List) {
      for (const Value& elem : p.elems()) ctx.require_path(elem.path_text(), st, filter);
    } else {
      ctx.require_path(p.path_text(), st, filter);
    }
    return Value::unit();
  }

  Value eval_node(const Expr&, const Expr::Generates& n, Env& env, ExecContext& ctx) {
    Value p = eval(*n.path, env, ctx);
    PathStamperKind st = n.stamper ? to_stamper(*n.stamper) : PathStamperKind::Hash;
    ctx.generate_path(p.path_text(), st);
    return Value::unit();
  }

  Value eval_node(const Expr&, const Expr::ExistsOp& n, Env& env, ExecContext& ctx) {
    Value p = eval(*n.path, env, ctx);
    // Record (and possibly build the generator) first, then observe.
    ctx.require_path(p.path_text(), PathStamperKind::Exists);
    return Value::boolean(fs::exists(ctx.resolve(p.path_text())));
  }

  Value eval_node(const Expr&, const Expr::ReadOp& n, Env& env, ExecContext& ctx) {
    Value p = eval(*n.path, env, ctx);
    ctx.require_path(p.path_text(), PathStamperKind::Hash);
    std::ifstream in(ctx.resolve(p.path_text()), std::ios::binary);
    if (!in) throw TaskFailedError("read: cannot open '" + p.path_text() + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return Value::str(std::move(content));
  }

  // Immediate entries of a directory that a dependency with this filter
  // covers: subdirectories always, files when the filter accepts them.
  std::vector<std::pair<std::string, bool>> covered_entries(const fs::path& dir,
                                                            const std::optional<Filter>& filter) {
    std::vector<std::pair<std::string, bool>> out;  // (name, is_dir)
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
      bool is_dir = e.is_directory();
      std::string name = e.path().filename().string();
      if (!is_dir && filter && !filter_accepts(*filter, name)) continue;
      out.emplace_back(std::move(name), is_dir);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  Value eval_node(const Expr&, const Expr::ListOp& n, Env& env, ExecContext& ctx) {
    Value p = eval(*n.path, env, ctx);
    std::optional<Filter> filter = eval_filter(n.filter, env, ctx);
    ctx.require_path(p.path_text(), PathStamperKind::Modified, filter);
    std::vector<Value> out;
    fs::path dir = ctx.resolve(p.path_text());
    if (fs::is_directory(dir)) {
      for (const auto& [name, is_dir] : covered_entries(dir, filter))
        out.push_back(Value::path(p.path_text() + "/" + name));
    }
    return Value::list(std::move(out));
  }

  Value eval_node(const Expr&, const Expr::WalkOp& n, Env& env, ExecContext& ctx) {
    Value p = eval(*n.path, env, ctx);
    std::optional<Filter> filter = eval_filter(n.filter, env, ctx);
    std::vector<Value> out;
    walk_dir(p.path_text(), filter, ctx, out);
    return Value::list(std::move(out));
  }

  // Depth-first preorder, lexicographic sibling order; files only in the
  // result, one stamped require per visited directory.
  void walk_dir(const std::string& pie_dir, const std::optional<Filter>& filter, ExecContext& ctx,
                std::vector<Value>& out) {
    ctx.require_path(pie_dir, PathStamperKind::Modified, filter);
    fs::path dir = ctx.resolve(pie_dir);
    if (!fs::is_directory(dir)) return;
    for (const auto& [name, is_dir] : covered_entries(dir, filter)) {
      std::string child = pie_dir + "/" + name;
      if (is_dir)
        walk_dir(child, filter, ctx, out);
      else
        out.push_back(Value::path(child));
    }
  }

  Value eval_node(const Expr&, const Expr::Return& n, Env& env, ExecContext& ctx) {
    throw ReturnUnwind{eval(*n.value, env, ctx)};
  }

  Value eval_node(const Expr&, const Expr::Fail& n, Env& env, ExecContext& ctx) {
    throw TaskFailedError(eval(*n.message, env, ctx).as_str());
  }

  Value eval_node(const Expr&, const Expr::UnitLit&, Env&, ExecContext&) { return Value::unit(); }
  Value eval_node(const Expr&, const Expr::BoolLit& n, Env&, ExecContext&) {
    return Value::boolean(n.value);
  }
  Value eval_node(const Expr&, const Expr::IntLit& n, Env&, ExecContext&) {
    return Value::integer(n.value);
  }
  Value eval_node(const Expr&, const Expr::NullLit&, Env&, ExecContext&) { return Value::null(); }

  Value eval_node(const Expr&, const Expr::TupleLit& n, Env& env, ExecContext& ctx) {
    std::vector<Value> elems;
    elems.reserve(n.elems.size());
    for (const ExprPtr& e : n.elems) elems.push_back(eval(*e, env, ctx));
    return Value::tuple(std::move(elems));
  }

  Value eval_node(const Expr&, const Expr::ListLit& n, Env& env, ExecContext& ctx) {
    std::vector<Value> elems;
    elems.reserve(n.elems.size());
    for (const ExprPtr& e : n.elems) elems.push_back(eval(*e, env, ctx));
    return Value::list(std::move(elems));
  }

  std::string eval_parts(const std::vector<InterpPart>& parts, Env& env, ExecContext& ctx) {
    std::string out;
    for (const InterpPart& p : parts) {
      if (auto* text = std::get_if<std::string>(&p))
        out += *text;
      else
        out += eval(**std::get_if<ExprPtr>(&p), env, ctx).display();
    }
    return out;
  }

  Value eval_node(const Expr&, const Expr::StrInterp& n, Env& env, ExecContext& ctx) {
    return Value::str(eval_parts(n.parts, env, ctx));
  }

  Value eval_node(const Expr&, const Expr::PathLit& n, Env& env, ExecContext& ctx) {
    std::string text = (n.relative ? "./" : "/") + eval_parts(n.parts, env, ctx);
    return Value::path(text);
  }

  const TypedProgram& tp_;
  const ForeignRegistry& fr_;
};

}  // namespace

void register_program(std::shared_ptr<const TypedProgram> tp, const ForeignRegistry& fr,
                      TaskRegistry& reg) {
  // Every foreign binding must resolve before a session starts.
  for (const auto& [name, info] : tp->data_table) {
    if (!fr.find_data(name)) throw UnresolvedForeignError(name);
  }
  for (const Program::Def& def : tp->program.defs) {
    auto* f = std::get_if<FuncDef>(&def);
    if (!f) continue;
    const std::string& name = f->head.name;
    if (f->foreign_binding) {
      const ForeignRegistry::FuncEntry* host = fr.find_func(*f->foreign_binding);
      if (!host) throw UnresolvedForeignError(*f->foreign_binding);
      if (host->mode == CallMode::Inline) continue;  // dispatched inside callers
      size_t nparams = f->head.params.size();
      const HostFunc& fn = host->fn;
      reg.add(name, [fn, nparams](ExecContext& ctx, const Value& input) -> TaskResult {
        std::vector<Value> args;
        if (nparams == 1) {
          args.push_back(input);
        } else if (nparams >= 2) {
          args = input.elems();
        }
        ForeignResult r = fn(ctx, args);
        return TaskResult{std::move(r.value), r.transient};
      });
    } else {
      reg.add(name, [tp, &fr, f](ExecContext& ctx, const Value& input) -> TaskResult {
        Evaluator ev(*tp, fr);
        return TaskResult{ev.eval_func_body(*f, ctx, input), false};
      });
    }
  }
}

Value call_entry(Session& s, const TypedProgram& tp, const std::string& func,
                 std::vector<Value> args) {
  auto [params, ret] = entry_signature(tp, func);
  if (args.size() != params.size())
    throw ArgumentMismatchError("function '" + func + "' expects " +
                                std::to_string(params.size()) + " argument(s), got " +
                                std::to_string(args.size()));
  for (size_t i = 0; i < args.size(); i++) {
    if (!value_conforms(args[i], params[i], tp))
      throw ArgumentMismatchError("argument " + std::to_string(i + 1) + " of '" + func +
                                  "' must be " + params[i].show() + ", got " +
                                  args[i].display());
  }
  TaskKey key{func, pack_args(std::move(args)).encode()};
  return s.require(key);
}

void register_stdlib(ForeignRegistry& fr) {
  fr.register_func(
      "exec", 1,
      [](ExecContext& ctx, std::span<const Value> args) -> ForeignResult {
        std::vector<std::string> argv;
        for (const Value& v : args[0].elems())
          argv.push_back(v.kind() == ValueKind::Path ? v.path_text() : v.as_str());
        if (argv.empty()) throw TaskFailedError("exec: empty argument list");
        ProcessResult r =
            run_process(argv, ctx.session().working_dir(), ctx.session().exec_paths());
        if (r.status != 0) {
          std::string cmd;
          for (const std::string& a : argv) cmd += (cmd.empty() ? "" : " ") + a;
          throw TaskFailedError("exec: '" + cmd + "' exited with status " +
                                std::to_string(r.status) +
                                (r.err.empty() ? "" : (": " + r.err)));
        }
        return {Value::tuple({Value::str(std::move(r.out)), Value::str(std::move(r.err))})};
      },
      CallMode::Inline);
}

}  // namespace pie
