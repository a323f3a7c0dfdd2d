#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pie/store.hpp"

namespace pie {

class ExecContext;
class Session;

struct TaskResult {
  Value value;
  bool transient = false;
};

using TaskImpl = std::function<TaskResult(ExecContext&, const Value& input)>;

class TaskRegistry {
 public:
  void add(std::string func_id, TaskImpl impl) { impls_[std::move(func_id)] = std::move(impl); }
  const TaskImpl* find(const std::string& func_id) const {
    auto it = impls_.find(func_id);
    return it == impls_.end() ? nullptr : &it->second;
  }
  bool contains(const std::string& func_id) const { return impls_.contains(func_id); }

 private:
  std::unordered_map<std::string, TaskImpl> impls_;
};

// Outputs of transient tasks, held for the lifetime of one runtime (process).
// Shared across the sessions of a watch loop.
using TransientCache = std::unordered_map<TaskKey, Value, TaskKeyHash>;

struct CycleError : PieError {
  CycleError(std::vector<TaskKey> stack, const TaskKey& repeated);
  std::vector<TaskKey> stack;
};

struct OverlapError : PieError {
  OverlapError(const std::string& path, const TaskKey& existing, const TaskKey& current);
  std::string path;
  TaskKey existing, current;
};

struct HiddenDepError : PieError {
  HiddenDepError(const std::string& path, const TaskKey& requirer, const TaskKey& generator);
  std::string path;
  TaskKey requirer, generator;
};

// One top-down incremental execution pass. Each task is validated or
// executed at most once per session. Single-threaded by construction.
class Session {
 public:
  Session(Store& store, const TaskRegistry& registry,
          std::filesystem::path working_dir = std::filesystem::current_path(),
          TransientCache* shared_transients = nullptr);

  // Returns the up-to-date output of the task, validating its recorded
  // dependencies in order and re-executing on the first inconsistency.
  Value require(const TaskKey& k);

  int exec_count(const TaskKey& k) const;
  int exec_count_for_func(const std::string& func_id) const;
  int total_executions() const;
  std::vector<TaskKey> executed_keys() const;

  const std::filesystem::path& working_dir() const { return working_dir_; }
  // Resolves normalized pie path text against the session working directory.
  std::filesystem::path resolve(const std::string& pie_path) const;

  Store& store() { return store_; }
  const TaskRegistry& registry() const { return registry_; }

  // Extra directories searched for executables by the exec builtin.
  void add_exec_path(std::filesystem::path dir) { exec_paths_.push_back(std::move(dir)); }
  const std::vector<std::filesystem::path>& exec_paths() const { return exec_paths_; }

 private:
  friend class ExecContext;

  struct Outcome {
    Value value;
    bool transient = false;
  };

  Outcome require_internal(const TaskKey& k);
  Outcome execute(const TaskKey& k);
  Outcome cached_output(const TaskKey& k, const TaskData& data) const;
  Stamp output_stamp(const Outcome& out, OutputStamperKind kind) const;

  std::optional<TaskKey> current_generator(const std::string& path) const;
  void note_required(const std::string& path, const TaskKey& by);
  void check_generate(const std::string& path, const TaskKey& current);
  // True when `from` holds a direct or transitive call dependency on `to`,
  // considering the executing stack and records stored this session.
  bool calls_transitively(const TaskKey& from, const TaskKey& to) const;

  Store& store_;
  const TaskRegistry& registry_;
  std::filesystem::path working_dir_;
  std::vector<std::filesystem::path> exec_paths_;

  TransientCache own_transients_;
  TransientCache& transients_;

  std::unordered_set<TaskKey, TaskKeyHash> consistent_;
  std::unordered_map<TaskKey, Value, TaskKeyHash> outputs_;  // consistent task outputs
  std::unordered_set<TaskKey, TaskKeyHash> in_progress_;     // validation + execution
  std::vector<TaskKey> executing_;                           // execution stack
  std::unordered_map<TaskKey, ExecContext*, TaskKeyHash> live_contexts_;
  std::unordered_map<TaskKey, int, TaskKeyHash> exec_count_;
  std::unordered_map<std::string, TaskKey> pending_generators_;
  std::unordered_map<std::string, std::vector<TaskKey>> required_log_;
};

// Per-execution recording context handed to task implementations.
class ExecContext {
 public:
  ExecContext(Session& session, TaskKey current)
      : session_(session), current_(std::move(current)) {}

  // Requires the callee, records a call dependency stamped over its output.
  Value require_call(const TaskKey& callee,
                     OutputStamperKind out_stamper = OutputStamperKind::Equals);

  // Records a path dependency. When the path has a committed generator other
  // than the current task, the generator is required first and an inferred
  // call dependency is recorded ahead of the path dependency.
  void require_path(const std::string& pie_path, PathStamperKind stamper,
                    std::optional<Filter> filter = std::nullopt);

  // Records a generate dependency; the current task becomes the unique
  // generator of the path. Throws OverlapError when another task already
  // generates it, HiddenDepError when a task required it earlier in this
  // session without a call dependency on the current task.
  void generate_path(const std::string& pie_path, PathStamperKind stamper);

  const TaskKey& current() const { return current_; }
  Session& session() { return session_; }
  std::filesystem::path resolve(const std::string& pie_path) const {
    return session_.resolve(pie_path);
  }
  const std::vector<Dependency>& recorded() const { return recorded_; }

 private:
  friend class Session;

  Session& session_;
  TaskKey current_;
  std::vector<Dependency> recorded_;
  std::vector<std::string> generated_paths_;
};

// Graph view of the committed store: one node per task, typed edges for
// call, require and generate dependencies.
struct DependencyGraph {
  struct Edge {
    std::string from;  // task label
    std::string to;    // task label or path text
    enum class Kind { Call, Require, Generate } kind;
  };
  std::vector<std::string> task_nodes;
  std::vector<std::string> path_nodes;
  std::vector<Edge> edges;

  std::string to_dot() const;
};

DependencyGraph export_dep_graph(const Store& store);

}  // namespace pie
