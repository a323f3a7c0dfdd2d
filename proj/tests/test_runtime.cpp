#include <fstream>

#include "doctest.h"
#include "pie/runtime.hpp"
#include "test_support.hpp"

using namespace pie;
using namespace pie::test;

namespace {

TaskKey key(const std::string& func, const Value& input = Value::unit()) {
  return {func, input.encode()};
}

std::string slurp(ExecContext& ctx, const std::string& pie_path, PathStamperKind st) {
  ctx.require_path(pie_path, st);
  return read_file(ctx.resolve(pie_path));
}

void spit(ExecContext& ctx, const std::string& pie_path, const std::string& content,
          PathStamperKind st = PathStamperKind::Hash) {
  write_file(ctx.resolve(pie_path), content);
  ctx.generate_path(pie_path, st);
}

struct Fixture {
  TempDir dir;
  TaskRegistry reg;
  std::unique_ptr<Store> store;

  Fixture() { store = Store::open(dir / "store"); }

  Session session(TransientCache* cache = nullptr) {
    return Session(*store, reg, dir.path(), cache);
  }
  void reopen() {
    store->commit();
    store.reset();
    store = Store::open(dir / "store");
  }
};

}  // namespace

TEST_CASE("fresh session: empty consistent set, zero counts, store visibility") {
  Fixture fx;
  fx.reg.add("const", [](ExecContext&, const Value&) { return TaskResult{Value::integer(42)}; });
  Session s1 = fx.session();
  CHECK(s1.total_executions() == 0);
  CHECK(s1.require(key("const")) == Value::integer(42));
  CHECK(s1.exec_count(key("const")) == 1);
  // second session over the same store sees the committed record
  Session s2 = fx.session();
  CHECK(s2.require(key("const")) == Value::integer(42));
  CHECK(s2.total_executions() == 0);
}

TEST_CASE("within one session a task executes at most once") {
  Fixture fx;
  int runs = 0;
  fx.reg.add("leaf", [&](ExecContext&, const Value&) {
    runs++;
    return TaskResult{Value::integer(1)};
  });
  fx.reg.add("root", [&](ExecContext& ctx, const Value&) {
    Value a = ctx.require_call(key("leaf"));
    Value b = ctx.require_call(key("leaf"));
    return TaskResult{Value::integer(a.as_int() + b.as_int())};
  });
  Session s = fx.session();
  CHECK(s.require(key("root")) == Value::integer(2));
  CHECK(runs == 1);
}

TEST_CASE("file change invalidates; unchanged files do not") {
  Fixture fx;
  fx.reg.add("readsrc", [&](ExecContext& ctx, const Value&) {
    return TaskResult{Value::str(slurp(ctx, "./src.txt", PathStamperKind::Hash))};
  });
  write_file(fx.dir / "src.txt", "v1");
  { Session s = fx.session(); CHECK(s.require(key("readsrc")) == Value::str("v1")); }
  { Session s = fx.session(); s.require(key("readsrc")); CHECK(s.total_executions() == 0); }
  touch(fx.dir / "src.txt");  // hash stamp: mtime-only change is invisible
  { Session s = fx.session(); s.require(key("readsrc")); CHECK(s.total_executions() == 0); }
  write_file(fx.dir / "src.txt", "v2");
  {
    Session s = fx.session();
    CHECK(s.require(key("readsrc")) == Value::str("v2"));
    CHECK(s.total_executions() == 1);
  }
}

TEST_CASE("callee output change invalidates the caller across sessions") {
  Fixture fx;
  fx.reg.add("leaf", [&](ExecContext& ctx, const Value&) {
    return TaskResult{Value::str(slurp(ctx, "./in.txt", PathStamperKind::Hash))};
  });
  fx.reg.add("caller", [&](ExecContext& ctx, const Value&) {
    Value v = ctx.require_call(key("leaf"));
    return TaskResult{Value::str("saw:" + v.as_str())};
  });
  write_file(fx.dir / "in.txt", "a");
  { Session s = fx.session(); CHECK(s.require(key("caller")) == Value::str("saw:a")); }
  write_file(fx.dir / "in.txt", "b");
  {
    Session s = fx.session();
    CHECK(s.require(key("caller")) == Value::str("saw:b"));
    CHECK(s.exec_count(key("leaf")) == 1);
    CHECK(s.exec_count(key("caller")) == 1);
  }
}

TEST_CASE("early cutoff: re-executed producer with unchanged output stops propagation") {
  Fixture fx;
  // producer depends on src by modified stamp but emits content-derived output
  fx.reg.add("producer", [&](ExecContext& ctx, const Value&) {
    std::string content = slurp(ctx, "./src.txt", PathStamperKind::Modified);
    spit(ctx, "./out.bin", "derived:" + content);
    return TaskResult{Value::path("./out.bin")};
  });
  fx.reg.add("consumer", [&](ExecContext& ctx, const Value&) {
    Value p = ctx.require_call(key("producer"));
    return TaskResult{Value::str(slurp(ctx, p.path_text(), PathStamperKind::Hash))};
  });
  write_file(fx.dir / "src.txt", "stable");
  { Session s = fx.session(); s.require(key("consumer")); CHECK(s.total_executions() == 2); }
  touch(fx.dir / "src.txt");  // modified stamp changes, content identical
  {
    Session s = fx.session();
    s.require(key("consumer"));
    CHECK(s.exec_count(key("producer")) == 1);  // re-ran
    CHECK(s.exec_count(key("consumer")) == 0);  // cut off: output bytes unchanged
  }
}

TEST_CASE("hidden dependency inference: require of a generated path records a call dep first") {
  Fixture fx;
  fx.reg.add("gen", [&](ExecContext& ctx, const Value&) {
    spit(ctx, "./data.out", "payload");
    return TaskResult{Value::path("./data.out")};
  });
  fx.reg.add("reader", [&](ExecContext& ctx, const Value&) {
    // no explicit call to gen; the runtime must infer it from the generator index
    return TaskResult{Value::str(slurp(ctx, "./data.out", PathStamperKind::Hash))};
  });
  {
    Session s = fx.session();
    s.require(key("gen"));
    CHECK(s.require(key("reader")) == Value::str("payload"));
  }
  auto data = fx.store->get_task(key("reader"));
  REQUIRE(data);
  REQUIRE(data->deps.size() == 2);
  auto* call = std::get_if<CallDep>(&data->deps[0]);
  REQUIRE(call);
  CHECK(call->callee == key("gen"));
  auto* req = std::get_if<RequireDep>(&data->deps[1]);
  REQUIRE(req);
  CHECK(req->path == "./data.out");

  // The inferred dependency keeps the reader fresh: change what gen reads.
  fx.reg.add("gen", [&](ExecContext& ctx, const Value&) {
    std::string content = slurp(ctx, "./seed.txt", PathStamperKind::Hash);
    spit(ctx, "./data.out", content);
    return TaskResult{Value::path("./data.out")};
  });
  write_file(fx.dir / "seed.txt", "fresh");
  fx.store->drop_task(key("gen"));  // re-register with the seeded behavior
  {
    Session s = fx.session();
    s.require(key("gen"));
    CHECK(s.require(key("reader")) == Value::str("fresh"));
  }
  write_file(fx.dir / "seed.txt", "fresher");
  {
    Session s = fx.session();
    CHECK(s.require(key("reader")) == Value::str("fresher"));
  }
}

TEST_CASE("requiring a never-generated path records only the require dep") {
  Fixture fx;
  write_file(fx.dir / "plain.txt", "x");
  fx.reg.add("r", [&](ExecContext& ctx, const Value&) {
    return TaskResult{Value::str(slurp(ctx, "./plain.txt", PathStamperKind::Hash))};
  });
  { Session s = fx.session(); s.require(key("r")); }
  auto data = fx.store->get_task(key("r"));
  REQUIRE(data->deps.size() == 1);
  CHECK(std::holds_alternative<RequireDep>(data->deps[0]));
}

TEST_CASE("self-generated paths do not create self call deps") {
  Fixture fx;
  fx.reg.add("selfish", [&](ExecContext& ctx, const Value&) {
    spit(ctx, "./own.txt", "mine");
    ctx.require_path("./own.txt", PathStamperKind::Hash);
    return TaskResult{Value::unit()};
  });
  { Session s = fx.session(); s.require(key("selfish")); }
  auto data = fx.store->get_task(key("selfish"));
  REQUIRE(data->deps.size() == 2);
  CHECK(std::holds_alternative<GenerateDep>(data->deps[0]));
  CHECK(std::holds_alternative<RequireDep>(data->deps[1]));
  // regenerating its own file across sessions is permitted
  Session s = fx.session();
  CHECK_NOTHROW(s.require(key("selfish")));
}

TEST_CASE("overlap: two distinct tasks generating one path abort execution") {
  Fixture fx;
  fx.reg.add("a", [&](ExecContext& ctx, const Value&) {
    spit(ctx, "./shared.txt", "from a");
    return TaskResult{Value::unit()};
  });
  fx.reg.add("b", [&](ExecContext& ctx, const Value&) {
    spit(ctx, "./shared.txt", "from b");
    return TaskResult{Value::unit()};
  });
  Session s = fx.session();
  s.require(key("a"));
  CHECK_THROWS_AS(s.require(key("b")), OverlapError);
  try {
    Session s2 = fx.session();
    s2.require(key("b"));
  } catch (const OverlapError& e) {
    CHECK(e.path == "./shared.txt");
    CHECK(e.existing == key("a"));
    CHECK(e.current == key("b"));
    CHECK(std::string(e.what()).find("a@") != std::string::npos);
    CHECK(std::string(e.what()).find("b@") != std::string::npos);
  }
  // failed task leaves no record
  CHECK(!fx.store->get_task(key("b")));
}

TEST_CASE("hidden dependency error: require before generate without a call path") {
  Fixture fx;
  write_file(fx.dir / "late.txt", "stale");
  fx.reg.add("early-reader", [&](ExecContext& ctx, const Value&) {
    return TaskResult{Value::str(slurp(ctx, "./late.txt", PathStamperKind::Hash))};
  });
  fx.reg.add("late-writer", [&](ExecContext& ctx, const Value&) {
    spit(ctx, "./late.txt", "new content");
    return TaskResult{Value::unit()};
  });
  Session s = fx.session();
  s.require(key("early-reader"));
  try {
    s.require(key("late-writer"));
    FAIL("expected HiddenDepError");
  } catch (const HiddenDepError& e) {
    CHECK(e.path == "./late.txt");
    CHECK(e.requirer == key("early-reader"));
    CHECK(e.generator == key("late-writer"));
  }
  CHECK(!fx.store->get_task(key("late-writer")));
}

TEST_CASE("require-then-generate within one call chain is allowed") {
  Fixture fx;
  write_file(fx.dir / "f.txt", "old");
  fx.reg.add("writer", [&](ExecContext& ctx, const Value&) {
    spit(ctx, "./f.txt", "newer");
    return TaskResult{Value::unit()};
  });
  fx.reg.add("wrapper", [&](ExecContext& ctx, const Value&) {
    ctx.require_path("./f.txt", PathStamperKind::Modified);
    ctx.require_call(key("writer"));  // the writer is transitively called by the requirer
    return TaskResult{Value::unit()};
  });
  Session s = fx.session();
  CHECK_NOTHROW(s.require(key("wrapper")));
}

TEST_CASE("cycles are detected, not diverging") {
  Fixture fx;
  fx.reg.add("ping", [&](ExecContext& ctx, const Value&) {
    ctx.require_call(key("pong"));
    return TaskResult{Value::unit()};
  });
  fx.reg.add("pong", [&](ExecContext& ctx, const Value&) {
    ctx.require_call(key("ping"));
    return TaskResult{Value::unit()};
  });
  Session s = fx.session();
  CHECK_THROWS_AS(s.require(key("ping")), CycleError);
  fx.reg.add("self", [&](ExecContext& ctx, const Value&) {
    ctx.require_call(key("self"));
    return TaskResult{Value::unit()};
  });
  Session s2 = fx.session();
  CHECK_THROWS_AS(s2.require(key("self")), CycleError);
}

TEST_CASE("unknown task ids surface as UnknownTask at require time") {
  Fixture fx;
  Session s = fx.session();
  CHECK_THROWS_AS(s.require(key("missing")), UnknownTaskError);
}

TEST_CASE("failed tasks leave no record and retry next session") {
  Fixture fx;
  int attempts = 0;
  fx.reg.add("flaky", [&](ExecContext&, const Value&) -> TaskResult {
    attempts++;
    if (attempts == 1) throw TaskFailedError("first attempt fails");
    return TaskResult{Value::integer(attempts)};
  });
  {
    Session s = fx.session();
    CHECK_THROWS_AS(s.require(key("flaky")), TaskFailedError);
    CHECK(!fx.store->get_task(key("flaky")));
  }
  Session s = fx.session();
  CHECK(s.require(key("flaky")) == Value::integer(2));
}

TEST_CASE("transient outputs: once per runtime, marker stamps on callers") {
  Fixture fx;
  int loads = 0;
  fx.reg.add("load", [&](ExecContext& ctx, const Value&) {
    loads++;
    std::string content = slurp(ctx, "./table.txt", PathStamperKind::Hash);
    return TaskResult{Value::str("loaded:" + content), /*transient=*/true};
  });
  fx.reg.add("use", [&](ExecContext& ctx, const Value&) {
    Value t = ctx.require_call(key("load"));
    return TaskResult{Value::str(t.as_str() + "!")};
  });
  write_file(fx.dir / "table.txt", "T");

  TransientCache runtime_cache;
  {
    Session s = fx.session(&runtime_cache);
    CHECK(s.require(key("use")) == Value::str("loaded:T!"));
    CHECK(loads == 1);
  }
  {
    // same runtime: cached in memory, not re-executed
    Session s = fx.session(&runtime_cache);
    s.require(key("use"));
    CHECK(s.total_executions() == 0);
    CHECK(loads == 1);
  }
  // caller's call dep on the transient task carries the marker stamp
  auto use_data = fx.store->get_task(key("use"));
  REQUIRE(use_data);
  auto* call = std::get_if<CallDep>(&use_data->deps[0]);
  REQUIRE(call);
  CHECK(call->out_stamp == Stamp{TransientStamp{}});

  // fresh runtime (empty cache): the transient task re-executes exactly once
  TransientCache fresh;
  {
    Session s = fx.session(&fresh);
    CHECK(s.require(key("use")) == Value::str("loaded:T!"));
    CHECK(loads == 2);
    CHECK(s.exec_count(key("load")) == 1);
    CHECK(s.exec_count(key("use")) == 0);
  }
  // and not demanded -> not executed
  TransientCache fresh2;
  {
    Session s = fx.session(&fresh2);
    fx.reg.add("independent",
               [](ExecContext&, const Value&) { return TaskResult{Value::unit()}; });
    s.require(key("independent"));
    CHECK(loads == 2);
  }
}

TEST_CASE("non-serializable output without transient wrapper is rejected") {
  Fixture fx;
  fx.reg.add("bad", [](ExecContext&, const Value&) {
    class Opaque : public ForeignObject {
      std::string_view type_name() const override { return "Opaque"; }
      bool equals(const ForeignObject&) const override { return false; }
      std::string display() const override { return "<Opaque>"; }
      bool serializable() const override { return false; }
      Bytes canonical_bytes() const override { throw NonSerializableError("Opaque"); }
      uint64_t digest64() const override { return 0; }
    };
    return TaskResult{Value::foreign(std::make_shared<Opaque>())};
  });
  Session s = fx.session();
  CHECK_THROWS_AS(s.require(key("bad")), NonSerializableError);
  CHECK(!fx.store->get_task(key("bad")));
}

TEST_CASE("externally deleted or modified generated outputs are regenerated") {
  Fixture fx;
  fx.reg.add("make", [&](ExecContext& ctx, const Value&) {
    spit(ctx, "./built.txt", "artifact");
    return TaskResult{Value::path("./built.txt")};
  });
  { Session s = fx.session(); s.require(key("make")); }
  fs::remove(fx.dir / "built.txt");
  {
    Session s = fx.session();
    s.require(key("make"));
    CHECK(s.total_executions() == 1);
    CHECK(read_file(fx.dir / "built.txt") == "artifact");
  }
  write_file(fx.dir / "built.txt", "tampered");
  {
    Session s = fx.session();
    s.require(key("make"));
    CHECK(s.total_executions() == 1);
    CHECK(read_file(fx.dir / "built.txt") == "artifact");
  }
}

TEST_CASE("restart persistence at store granularity") {
  Fixture fx;
  fx.reg.add("work", [&](ExecContext& ctx, const Value& in) {
    return TaskResult{Value::integer(in.as_int() * 2)};
  });
  {
    Session s = fx.session();
    CHECK(s.require(key("work", Value::integer(21))) == Value::integer(42));
  }
  fx.reopen();  // commit, drop the handle, open fresh: a process restart
  Session s = fx.session();
  CHECK(s.require(key("work", Value::integer(21))) == Value::integer(42));
  CHECK(s.total_executions() == 0);
}

TEST_CASE("dependency graph export") {
  Fixture fx;
  CHECK(export_dep_graph(*fx.store).task_nodes.empty());
  CHECK(export_dep_graph(*fx.store).edges.empty());

  fx.reg.add("gen", [&](ExecContext& ctx, const Value&) {
    spit(ctx, "./o.txt", "x");
    return TaskResult{Value::path("./o.txt")};
  });
  fx.reg.add("use", [&](ExecContext& ctx, const Value&) {
    Value p = ctx.require_call(key("gen"));
    ctx.require_path(p.path_text(), PathStamperKind::Hash);
    return TaskResult{Value::unit()};
  });
  { Session s = fx.session(); s.require(key("use")); }

  DependencyGraph g = export_dep_graph(*fx.store);
  CHECK(g.task_nodes.size() == 2);
  // edge count equals total stored deps
  size_t dep_total = 0;
  fx.store->for_each_task(
      [&](const TaskKey&, const TaskData& d) { dep_total += d.deps.size(); });
  CHECK(g.edges.size() == dep_total);
  std::string dot = g.to_dot();
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("[kind=call]") != std::string::npos);
  CHECK(dot.find("[kind=require]") != std::string::npos);
  CHECK(dot.find("[kind=generate]") != std::string::npos);
}
