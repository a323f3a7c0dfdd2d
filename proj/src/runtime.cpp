#include "pie/runtime.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace pie {

namespace {

std::string cycle_message(const std::vector<TaskKey>& stack, const TaskKey& repeated) {
  std::ostringstream os;
  os << "dependency cycle detected: ";
  for (const TaskKey& k : stack) os << k.label() << " -> ";
  os << repeated.label();
  return os.str();
}

}  // namespace

CycleError::CycleError(std::vector<TaskKey> stack_, const TaskKey& repeated)
    : PieError(cycle_message(stack_, repeated)), stack(std::move(stack_)) {}

OverlapError::OverlapError(const std::string& path_, const TaskKey& existing_,
                           const TaskKey& current_)
    : PieError("overlapping generated path '" + path_ + "': generated by both " +
               existing_.label() + " and " + current_.label()),
      path(path_),
      existing(existing_),
      current(current_) {}

HiddenDepError::HiddenDepError(const std::string& path_, const TaskKey& requirer_,
                               const TaskKey& generator_)
    : PieError("hidden dependency on '" + path_ + "': required by " + requirer_.label() +
               " before its generator " + generator_.label() + " ran, without a call dependency"),
      path(path_),
      requirer(requirer_),
      generator(generator_) {}

Session::Session(Store& store, const TaskRegistry& registry, std::filesystem::path working_dir,
                 TransientCache* shared_transients)
    : store_(store),
      registry_(registry),
      working_dir_(std::move(working_dir)),
      transients_(shared_transients ? *shared_transients : own_transients_) {}

std::filesystem::path Session::resolve(const std::string& pie_path) const {
  if (!pie_path.empty() && pie_path.front() == '/') return std::filesystem::path(pie_path);
  return working_dir_ / pie_path;
}

Value Session::require(const TaskKey& k) { return require_internal(k).value; }

int Session::exec_count(const TaskKey& k) const {
  auto it = exec_count_.find(k);
  return it == exec_count_.end() ? 0 : it->second;
}

int Session::exec_count_for_func(const std::string& func_id) const {
  int n = 0;
  for (const auto& [k, c] : exec_count_)
    if (k.func_id == func_id) n += c;
  return n;
}

int Session::total_executions() const {
  int n = 0;
  for (const auto& [k, c] : exec_count_) n += c;
  return n;
}

std::vector<TaskKey> Session::executed_keys() const {
  std::vector<TaskKey> out;
  for (const auto& [k, c] : exec_count_)
    if (c > 0) out.push_back(k);
  return out;
}

Session::Outcome Session::cached_output(const TaskKey& k, const TaskData& data) const {
  if (data.output.kind == OutputRecord::Kind::Transient) {
    auto it = transients_.find(k);
    if (it == transients_.end())
      throw PieError("internal: transient output missing from memory cache");
    return Outcome{it->second, true};
  }
  return Outcome{*data.output.value, false};
}

Stamp Session::output_stamp(const Outcome& out, OutputStamperKind kind) const {
  if (out.transient) return Stamp{TransientStamp{}};
  return stamp_output(out.value, kind);
}

Session::Outcome Session::require_internal(const TaskKey& k) {
  if (consistent_.contains(k)) {
    auto it = outputs_.find(k);
    if (it != outputs_.end()) {
      bool transient = transients_.contains(k);
      return Outcome{it->second, transient};
    }
    auto data = store_.get_task(k);
    return cached_output(k, *data);
  }

  if (in_progress_.contains(k)) throw CycleError(executing_, k);
  in_progress_.insert(k);
  struct ProgressGuard {
    Session& s;
    const TaskKey& k;
    ~ProgressGuard() { s.in_progress_.erase(k); }
  } guard{*this, k};

  std::optional<TaskData> data = store_.get_task(k);
  bool must_exec = !data.has_value();

  if (data) {
    for (const Dependency& dep : data->deps) {
      if (auto* c = std::get_if<CallDep>(&dep)) {
        Outcome out = require_internal(c->callee);
        if (output_stamp(out, c->out_stamper) != c->out_stamp) {
          must_exec = true;
          break;
        }
      } else if (auto* q = std::get_if<RequireDep>(&dep)) {
        if (auto g = store_.get_generator(q->path); g && *g != k) require_internal(*g);
        if (stamp_path(resolve(q->path), q->stamper, q->filter) != q->stamp) {
          must_exec = true;
          break;
        }
      } else {
        auto& g = std::get<GenerateDep>(dep);
        if (stamp_path(resolve(g.path), g.stamper) != g.stamp) {
          must_exec = true;
          break;
        }
      }
    }
    if (!must_exec) {
      if (data->output.kind == OutputRecord::Kind::Transient && !transients_.contains(k)) {
        must_exec = true;  // output not recoverable in this runtime
      } else {
        consistent_.insert(k);
        Outcome out = cached_output(k, *data);
        outputs_.emplace(k, out.value);
        return out;
      }
    }
  }

  return execute(k);
}

Session::Outcome Session::execute(const TaskKey& k) {
  const TaskImpl* impl = registry_.find(k.func_id);
  if (!impl) throw UnknownTaskError(k.func_id);

  Value input = decode_value(k.input, store_.codec());

  executing_.push_back(k);
  ExecContext ctx(*this, k);
  live_contexts_[k] = &ctx;
  TaskResult result;
  try {
    result = (*impl)(ctx, input);

    TaskData data;
    data.input = input;
    data.output.kind =
        result.transient ? OutputRecord::Kind::Transient : OutputRecord::Kind::Persisted;
    if (!result.transient) data.output.value = result.value;  // set_task rejects unserializable
    data.deps = ctx.recorded_;
    store_.set_task(k, data);
  } catch (...) {
    // Failed tasks leave no record; undo their pending generator claims.
    for (const std::string& p : ctx.generated_paths_) {
      auto it = pending_generators_.find(p);
      if (it != pending_generators_.end() && it->second == k) pending_generators_.erase(it);
    }
    live_contexts_.erase(k);
    executing_.pop_back();
    throw;
  }
  live_contexts_.erase(k);
  executing_.pop_back();

  consistent_.insert(k);
  outputs_.insert_or_assign(k, result.value);
  exec_count_[k]++;
  if (result.transient)
    transients_.insert_or_assign(k, result.value);
  else
    transients_.erase(k);
  return Outcome{result.value, result.transient};
}

std::optional<TaskKey> Session::current_generator(const std::string& path) const {
  auto it = pending_generators_.find(path);
  if (it != pending_generators_.end()) return it->second;
  return store_.get_generator(path);
}

void Session::note_required(const std::string& path, const TaskKey& by) {
  required_log_[path].push_back(by);
}

bool Session::calls_transitively(const TaskKey& from, const TaskKey& to) const {
  if (from == to) return true;
  auto on_stack = [&](const TaskKey& k) {
    return std::find(executing_.begin(), executing_.end(), k) != executing_.end();
  };
  // Everything on the execution stack (ultimately) records a call chain down
  // to the innermost executing task, which is `to` during a generate check.
  if (on_stack(from)) return true;

  std::unordered_set<TaskKey, TaskKeyHash> visited;
  std::deque<TaskKey> work{from};
  while (!work.empty()) {
    TaskKey k = work.front();
    work.pop_front();
    if (k == to || on_stack(k)) return true;
    if (!visited.insert(k).second) continue;

    auto push_callees = [&](const std::vector<Dependency>& deps) {
      for (const Dependency& dep : deps)
        if (auto* c = std::get_if<CallDep>(&dep)) work.push_back(c->callee);
    };
    if (auto it = live_contexts_.find(k); it != live_contexts_.end()) {
      push_callees(it->second->recorded());
    } else if (auto data = store_.get_task(k)) {
      push_callees(data->deps);
    }
  }
  return false;
}

void Session::check_generate(const std::string& path, const TaskKey& current) {
  if (auto g = current_generator(path); g && *g != current) throw OverlapError(path, *g, current);
  if (auto it = required_log_.find(path); it != required_log_.end()) {
    for (const TaskKey& requirer : it->second) {
      if (requirer == current) continue;
      if (!calls_transitively(requirer, current)) throw HiddenDepError(path, requirer, current);
    }
  }
}

Value ExecContext::require_call(const TaskKey& callee, OutputStamperKind out_stamper) {
  Session::Outcome out = session_.require_internal(callee);
  recorded_.push_back(CallDep{callee, out_stamper, session_.output_stamp(out, out_stamper)});
  return out.value;
}

void ExecContext::require_path(const std::string& pie_path, PathStamperKind stamper,
                               std::optional<Filter> filter) {
  if (auto g = session_.current_generator(pie_path); g && *g != current_) {
    Session::Outcome out = session_.require_internal(*g);
    recorded_.push_back(
        CallDep{*g, OutputStamperKind::Equals, session_.output_stamp(out, OutputStamperKind::Equals)});
  }
  Stamp stamp = stamp_path(session_.resolve(pie_path), stamper, filter);
  recorded_.push_back(RequireDep{pie_path, stamper, std::move(filter), std::move(stamp)});
  session_.note_required(pie_path, current_);
}

void ExecContext::generate_path(const std::string& pie_path, PathStamperKind stamper) {
  session_.check_generate(pie_path, current_);
  Stamp stamp = stamp_path(session_.resolve(pie_path), stamper);
  recorded_.push_back(GenerateDep{pie_path, stamper, std::move(stamp)});
  session_.pending_generators_.insert_or_assign(pie_path, current_);
  generated_paths_.push_back(pie_path);
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string DependencyGraph::to_dot() const {
  std::ostringstream os;
  os << "digraph pie {\n";
  for (const std::string& t : task_nodes)
    os << "  \"task:" << dot_escape(t) << "\" [label=\"" << dot_escape(t) << "\", shape=box];\n";
  for (const std::string& p : path_nodes)
    os << "  \"path:" << dot_escape(p) << "\" [label=\"" << dot_escape(p) << "\", shape=note];\n";
  for (const Edge& e : edges) {
    const char* kind = e.kind == Edge::Kind::Call      ? "call"
                       : e.kind == Edge::Kind::Require ? "require"
                                                       : "generate";
    const char* prefix = e.kind == Edge::Kind::Call ? "task:" : "path:";
    os << "  \"task:" << dot_escape(e.from) << "\" -> \"" << prefix << dot_escape(e.to)
       << "\" [kind=" << kind << "];\n";
  }
  os << "}\n";
  return os.str();
}

DependencyGraph export_dep_graph(const Store& store) {
  DependencyGraph g;
  std::set<std::string> paths;
  store.for_each_task([&](const TaskKey& k, const TaskData& d) {
    g.task_nodes.push_back(k.label());
    for (const Dependency& dep : d.deps) {
      if (auto* c = std::get_if<CallDep>(&dep)) {
        g.edges.push_back({k.label(), c->callee.label(), DependencyGraph::Edge::Kind::Call});
      } else if (auto* q = std::get_if<RequireDep>(&dep)) {
        paths.insert(q->path);
        g.edges.push_back({k.label(), q->path, DependencyGraph::Edge::Kind::Require});
      } else {
        auto& gd = std::get<GenerateDep>(dep);
        paths.insert(gd.path);
        g.edges.push_back({k.label(), gd.path, DependencyGraph::Edge::Kind::Generate});
      }
    }
  });
  g.path_nodes.assign(paths.begin(), paths.end());
  std::sort(g.task_nodes.begin(), g.task_nodes.end());
  return g;
}

}  // namespace pie
