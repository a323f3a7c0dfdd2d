#include "doctest.h"
#include "pie/eval.hpp"
#include "pie/parser.hpp"
#include "pie/stubs.hpp"
#include "test_support.hpp"

using namespace pie;
using namespace pie::test;

namespace {

// A checked program wired to a session over a temp working directory.
struct Pipeline {
  TempDir dir;
  ForeignRegistry foreign;
  TaskRegistry tasks;
  std::shared_ptr<const TypedProgram> typed;
  std::unique_ptr<Store> store;

  explicit Pipeline(const std::string& source) {
    ParseResult r = parse_program(source, "<pipeline>");
    if (!r.program) {
      for (const auto& d : r.diagnostics)
        MESSAGE(render_diagnostic(d, source, "<pipeline>"));
      REQUIRE(r.program);
    }
    CheckResult c = check(std::move(*r.program));
    for (const auto& d : c.diagnostics) MESSAGE(render_diagnostic(d, source, "<pipeline>"));
    REQUIRE(c.typed);
    typed = c.typed;
    register_stdlib(foreign);
    register_foreign_stubs(foreign);
    install_stubs(dir / "bin");
  }

  void finish() {
    register_program(typed, foreign, tasks);
    store = Store::open(dir / "store", &foreign);
  }

  Session session(TransientCache* cache = nullptr) {
    Session s(*store, tasks, dir.path(), cache);
    s.add_exec_path(dir / "bin");
    return s;
  }

  Value run(const std::string& func, std::vector<Value> args, TransientCache* cache = nullptr) {
    Session s = session(cache);
    return call_entry(s, *typed, func, std::move(args));
  }

  std::optional<TaskData> record(const std::string& func, std::vector<Value> args) {
    TaskKey k{func, pack_args(std::move(args)).encode()};
    return store->get_task(k);
  }
};

}  // namespace

TEST_CASE("pack_args: unit / single / tuple") {
  CHECK(pack_args({}) == Value::unit());
  CHECK(pack_args({Value::integer(3)}) == Value::integer(3));
  CHECK(pack_args({Value::integer(1), Value::str("a")}) ==
        Value::tuple({Value::integer(1), Value::str("a")}));
}

TEST_CASE("register_program installs every definition; unresolved foreigns fail") {
  Pipeline p(
      "func f() -> int = 1\n"
      "func g() -> int = f()\n");
  p.finish();
  CHECK(p.tasks.contains("f"));
  CHECK(p.tasks.contains("g"));
  // registering twice is idempotent
  CHECK_NOTHROW(register_program(p.typed, p.foreign, p.tasks));

  Pipeline bad("func h() -> int = foreign no-such-binding\n");
  CHECK_THROWS_AS(register_program(bad.typed, bad.foreign, bad.tasks), UnresolvedForeignError);
}

TEST_CASE("call_entry checks arity and runtime conformance") {
  Pipeline p("func f(x: int, s: string) -> int = x\n");
  p.finish();
  CHECK(p.run("f", {Value::integer(4), Value::str("y")}) == Value::integer(4));
  CHECK_THROWS_AS(p.run("f", {Value::integer(4)}), ArgumentMismatchError);
  CHECK_THROWS_AS(p.run("f", {Value::str("no"), Value::str("y")}), ArgumentMismatchError);
  CHECK_THROWS_AS(p.run("nope", {}), UnknownFunctionError);
}

TEST_CASE("requires records stamped deps; element-wise over lists; filters attach") {
  Pipeline p(
      "func f(file: path, dirs: path*) -> unit = {\n"
      "  requires file by hash;\n"
      "  [requires dir with extension \"sdf\" | dir <- dirs];\n"
      "  unit\n"
      "}\n");
  p.finish();
  write_file(p.dir / "a.txt", "x");
  fs::create_directories(p.dir / "inc");
  p.run("f", {Value::path("./a.txt"), Value::list({Value::path("./inc")})});

  auto data = p.record("f", {Value::path("./a.txt"), Value::list({Value::path("./inc")})});
  REQUIRE(data);
  REQUIRE(data->deps.size() == 2);
  auto* r0 = std::get_if<RequireDep>(&data->deps[0]);
  REQUIRE(r0);
  CHECK(r0->path == "./a.txt");
  CHECK(r0->stamper == PathStamperKind::Hash);
  CHECK(!r0->filter);
  auto* r1 = std::get_if<RequireDep>(&data->deps[1]);
  REQUIRE(r1);
  CHECK(r1->path == "./inc");
  CHECK(r1->stamper == PathStamperKind::Modified);  // default
  REQUIRE(r1->filter);
  CHECK(r1->filter->kind == FilterKind::Extension);
  CHECK(r1->filter->args == std::vector<std::string>{"sdf"});
}

TEST_CASE("generates records a hash-stamped dep by default") {
  Pipeline p(
      "func exec(arguments: string*) -> (string, string) = foreign exec\n"
      "func make(out: path) -> path = {\n"
      "  exec([\"echo-stub\", \"hi\"]);\n"
      "  generates out;\n"
      "  out\n"
      "}\n");
  p.finish();
  write_file(p.dir / "made.txt", "content");
  p.run("make", {Value::path("./made.txt")});
  auto data = p.record("make", {Value::path("./made.txt")});
  REQUIRE(data);
  auto* g = std::get_if<GenerateDep>(&data->deps[0]);
  REQUIRE(g);
  CHECK(g->stamper == PathStamperKind::Hash);
  CHECK(*p.store->get_generator("./made.txt") == TaskKey{"make", Value::path("./made.txt").encode()});
}

TEST_CASE("read returns content and records a hash require") {
  Pipeline p("func f(file: path) -> string = read file\n");
  p.finish();
  write_file(p.dir / "data.txt", "hello pie");
  CHECK(p.run("f", {Value::path("./data.txt")}) == Value::str("hello pie"));
  auto data = p.record("f", {Value::path("./data.txt")});
  auto* r = std::get_if<RequireDep>(&data->deps[0]);
  REQUIRE(r);
  CHECK(r->stamper == PathStamperKind::Hash);
  // read of a missing file aborts the task and leaves no record
  CHECK_THROWS_AS(p.run("f", {Value::path("./missing.txt")}), TaskFailedError);
  CHECK(!p.record("f", {Value::path("./missing.txt")}));
}

TEST_CASE("exists records an exists-stamped require and reports presence") {
  Pipeline p("func f(file: path) -> bool = exists file\n");
  p.finish();
  CHECK(p.run("f", {Value::path("./nope")}) == Value::boolean(false));
  write_file(p.dir / "yes", "x");
  CHECK(p.run("f", {Value::path("./yes")}) == Value::boolean(true));
  auto data = p.record("f", {Value::path("./nope")});
  auto* r = std::get_if<RequireDep>(&data->deps[0]);
  REQUIRE(r);
  CHECK(r->stamper == PathStamperKind::Exists);
  CHECK(r->stamp == Stamp{ExistsStamp{false}});
  // appearance of the file invalidates the record
  write_file(p.dir / "nope", "now");
  CHECK(p.run("f", {Value::path("./nope")}) == Value::boolean(true));
}

TEST_CASE("list returns covered entries; walk returns files recursively") {
  Pipeline p(
      "func l(dir: path) -> path* = list dir with extension \"sdf\"\n"
      "func w(dir: path) -> path* = walk dir with extensions [\"java\", \"scala\"]\n");
  p.finish();
  write_file(p.dir / "d/a.sdf", "1");
  write_file(p.dir / "d/b.txt", "2");
  write_file(p.dir / "d/sub/c.sdf", "3");
  Value listed = p.run("l", {Value::path("./d")});
  // subdirectories stay visible; non-matching files are filtered
  CHECK(listed == Value::list({Value::path("./d/a.sdf"), Value::path("./d/sub")}));

  write_file(p.dir / "src/main/B.java", "b");
  write_file(p.dir / "src/main/A.java", "a");
  write_file(p.dir / "src/README.md", "no");
  write_file(p.dir / "src/z/C.scala", "c");
  Value walked = p.run("w", {Value::path("./src")});
  CHECK(walked == Value::list({Value::path("./src/main/A.java"), Value::path("./src/main/B.java"),
                               Value::path("./src/z/C.scala")}));
  // one stamped require per visited directory
  auto data = p.record("w", {Value::path("./src")});
  size_t dir_requires = 0;
  for (const Dependency& dep : data->deps)
    if (auto* r = std::get_if<RequireDep>(&dep)) {
      CHECK(r->stamper == PathStamperKind::Modified);
      REQUIRE(r->filter);
      dir_requires++;
    }
  CHECK(dir_requires == 3);  // ./src, ./src/main, ./src/z

  // adding a matching file anywhere under the tree invalidates the walk
  TransientCache cache;
  {
    Session s = p.session();
    TaskKey k{"w", Value::path("./src").encode()};
    s.require(k);
    CHECK(s.total_executions() == 0);
  }
  write_file(p.dir / "src/z/D.java", "d");
  Value walked2 = p.run("w", {Value::path("./src")});
  CHECK(walked2.elems().size() == 4);
}

TEST_CASE("comprehension law: order and length preserved, product order row-major") {
  Pipeline p(
      "func twice(x: int) -> int = x + x\n"
      "func f(xs: int*) -> int* = [twice(x) | x <- xs]\n"
      "func g(xs: int*, ys: string*) -> (int, string)* = [(x, y) | x <- xs, y <- ys]\n");
  p.finish();
  Value xs = Value::list({Value::integer(3), Value::integer(1), Value::integer(2)});
  CHECK(p.run("f", {xs}) ==
        Value::list({Value::integer(6), Value::integer(2), Value::integer(4)}));

  Value ys = Value::list({Value::str("a"), Value::str("b")});
  Value prod = p.run("g", {Value::list({Value::integer(1), Value::integer(2)}), ys});
  REQUIRE(prod.elems().size() == 4);
  CHECK(prod.elems()[0] == Value::tuple({Value::integer(1), Value::str("a")}));
  CHECK(prod.elems()[1] == Value::tuple({Value::integer(1), Value::str("b")}));
  CHECK(prod.elems()[2] == Value::tuple({Value::integer(2), Value::str("a")}));
  CHECK(prod.elems()[3] == Value::tuple({Value::integer(2), Value::str("b")}));
}

TEST_CASE("string interpolation uses display; paths interpolate and normalize") {
  Pipeline p(
      "func f(file: path) -> string = \"-o$file\"\n"
      "func g(b: string, s: string) -> path = ./results/${b}_${s}.csv\n"
      "func h(n: int) -> string = \"n=${n + 1}\"\n");
  p.finish();
  CHECK(p.run("f", {Value::path("a.sdf")}) == Value::str("-oa.sdf"));
  CHECK(p.run("g", {Value::str("set"), Value::str("clojure")}) ==
        Value::path("./results/set_clojure.csv"));
  CHECK(p.run("h", {Value::integer(41)}) == Value::str("n=42"));
}

TEST_CASE("path method replaceExtension") {
  CHECK(path_method(Value::path("a/lexical.sdf"), "replaceExtension", {{Value::str("norm")}}) ==
        Value::path("a/lexical.norm"));
  CHECK(path_method(Value::path("a/noext"), "replaceExtension", {{Value::str("dep")}}) ==
        Value::path("a/noext.dep"));
  CHECK(path_method(Value::path("a.b.c"), "replaceExtension", {{Value::str("x")}}) ==
        Value::path("a.b.x"));
  // dotfiles have no extension to replace
  CHECK(path_method(Value::path("dir/.hidden"), "replaceExtension", {{Value::str("x")}}) ==
        Value::path("dir/.hidden.x"));
  CHECK_THROWS_AS(path_method(Value::path("a"), "unknown", {}), UnknownMethodError);
}

TEST_CASE("exec runs processes in the session working directory") {
  Pipeline p(
      "func exec(arguments: string*) -> (string, string) = foreign exec\n"
      "func hello() -> (string, string) = exec([\"echo-stub\", \"hi\", \"there\"])\n"
      "func boom() -> (string, string) = exec([\"fail-stub\"])\n"
      "func ghost() -> (string, string) = exec([\"no-such-tool-anywhere\"])\n");
  p.finish();
  CHECK(p.run("hello", {}) == Value::tuple({Value::str("hi there\n"), Value::str("")}));
  CHECK_THROWS_AS(p.run("boom", {}), TaskFailedError);
  CHECK_THROWS_AS(p.run("ghost", {}), ExecutableNotFoundError);
  // nonzero exit reports the status
  try {
    p.run("boom", {});
  } catch (const TaskFailedError& e) {
    CHECK(std::string(e.what()).find("status 1") != std::string::npos);
  }
}

TEST_CASE("exec re-runs whenever its calling task re-executes") {
  // The process is inline in the caller, not a cached task: a re-executed
  // caller with identical exec argv still re-runs the tool.
  Pipeline p(
      "func exec(arguments: string*) -> (string, string) = foreign exec\n"
      "func build(src: path) -> string = {\n"
      "  requires src by hash;\n"
      "  exec([\"sdf2table\", \"$src\", \"-oout.tbl\"]);\n"
      "  generates ./out.tbl;\n"
      "  read ./out.tbl\n"
      "}\n");
  p.finish();
  write_file(p.dir / "in.sdf", "v1");
  Value first = p.run("build", {Value::path("./in.sdf")});
  write_file(p.dir / "in.sdf", "v2");
  Value second = p.run("build", {Value::path("./in.sdf")});
  CHECK(first != second);  // the tool really ran again on new content
}

TEST_CASE("fail and null assertion abort the task without a store record") {
  Pipeline p(
      "func f(c: bool) -> int = { if(c) fail \"boom $c\"; 7 }\n"
      "func g(x: int?) -> int = x!\n");
  p.finish();
  CHECK(p.run("f", {Value::boolean(false)}) == Value::integer(7));
  CHECK_THROWS_WITH_AS(p.run("f", {Value::boolean(true)}), "boom true", TaskFailedError);
  CHECK(!p.record("f", {Value::boolean(true)}));
  CHECK(p.run("g", {Value::integer(5)}) == Value::integer(5));
  CHECK_THROWS_AS(p.run("g", {Value::null()}), NullAssertionError);
}

TEST_CASE("integer overflow is an error, not wraparound") {
  Pipeline p("func f(a: int, b: int) -> int = a + b\n");
  p.finish();
  CHECK_THROWS_AS(p.run("f", {Value::integer(INT64_MAX), Value::integer(1)}), IntOverflowError);
  CHECK(p.run("f", {Value::integer(INT64_MAX - 1), Value::integer(1)}) ==
        Value::integer(INT64_MAX));
}

TEST_CASE("short-circuit logic and equality semantics") {
  Pipeline p(
      "func f(a: bool, b: bool) -> bool = a && b\n"
      "func g(a: bool, b: bool) -> bool = a || b\n"
      "func ne(x: int?, y: int?) -> bool = x != y\n");
  p.finish();
  CHECK(p.run("f", {Value::boolean(true), Value::boolean(false)}) == Value::boolean(false));
  CHECK(p.run("g", {Value::boolean(false), Value::boolean(true)}) == Value::boolean(true));
  CHECK(p.run("ne", {Value::integer(1), Value::null()}) == Value::boolean(true));
  CHECK(p.run("ne", {Value::null(), Value::null()}) == Value::boolean(false));
}

TEST_CASE("blocks scope lexically; inner frames shadow outer") {
  Pipeline p(
      "func f(x: int) -> int = {\n"
      "  val y = { val x = 10; x + 1 };\n"
      "  x + y\n"
      "}\n");
  p.finish();
  CHECK(p.run("f", {Value::integer(1)}) == Value::integer(12));
}

TEST_CASE("if without else yields unit; return unwinds the function") {
  Pipeline p(
      "func f(c: bool) -> unit = if(c) unit\n"
      "func g(c: bool) -> int = { if(c) return 1; 2 }\n");
  p.finish();
  CHECK(p.run("f", {Value::boolean(false)}) == Value::unit());
  CHECK(p.run("g", {Value::boolean(true)}) == Value::integer(1));
  CHECK(p.run("g", {Value::boolean(false)}) == Value::integer(2));
}

TEST_CASE("foreign data methods dispatch through the registry chain") {
  Pipeline p(
      "data Workspace foreign java Workspace {\n"
      "  func extensions() -> string*\n"
      "  func langSpec(file: path) -> LangSpec\n"
      "}\n"
      "data LangSpec foreign java LangSpec {\n"
      "  func syntax() -> path\n"
      "}\n"
      "func createWorkspace(text: string, root: path) -> Workspace = foreign createWorkspace\n"
      "func f(cfg: string) -> path = {\n"
      "  val ws = createWorkspace(cfg, ./);\n"
      "  val spec = ws.langSpec(./x.lang1);\n"
      "  spec.syntax()\n"
      "}\n");
  p.finish();
  CHECK(p.run("f", {Value::str("lang1=./specs/lang1\n")}) ==
        Value::path("./specs/lang1/main.sdf"));
}

TEST_CASE("dependency completeness: builtin filesystem reads are covered by requires") {
  Pipeline p(
      "func f(file: path, dir: path) -> (string, bool, path*, path*) =\n"
      "  (read file, exists file, list dir, walk dir)\n");
  p.finish();
  write_file(p.dir / "f.txt", "z");
  write_file(p.dir / "d/e.txt", "y");
  p.run("f", {Value::path("./f.txt"), Value::path("./d")});
  auto data = p.record("f", {Value::path("./f.txt"), Value::path("./d")});
  REQUIRE(data);
  // every access recorded: read(hash) + exists + list(modified) + walk(dir)
  std::vector<std::pair<std::string, PathStamperKind>> seen;
  for (const Dependency& dep : data->deps)
    if (auto* r = std::get_if<RequireDep>(&dep)) seen.emplace_back(r->path, r->stamper);
  CHECK(seen.size() == 4);
  CHECK(seen[0] == std::make_pair(std::string("./f.txt"), PathStamperKind::Hash));
  CHECK(seen[1] == std::make_pair(std::string("./f.txt"), PathStamperKind::Exists));
  CHECK(seen[2] == std::make_pair(std::string("./d"), PathStamperKind::Modified));
  CHECK(seen[3] == std::make_pair(std::string("./d"), PathStamperKind::Modified));
}

TEST_CASE("re-evaluating an unchanged task yields an equal value") {
  Pipeline p(
      "func f(file: path) -> (string, int) = (read file, 40 + 2)\n");
  p.finish();
  write_file(p.dir / "in.txt", "stable");
  Value v1 = p.run("f", {Value::path("./in.txt")});
  p.store->drop_task(TaskKey{"f", Value::path("./in.txt").encode()});
  Value v2 = p.run("f", {Value::path("./in.txt")});
  CHECK(v1 == v2);
}
