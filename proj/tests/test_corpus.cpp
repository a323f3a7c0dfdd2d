#include "doctest.h"
#include "pie/eval.hpp"
#include "pie/parser.hpp"
#include "pie/stubs.hpp"
#include "test_support.hpp"

using namespace pie;
using namespace pie::test;

namespace {

// A corpus pipeline copied into a temp working directory, stubs installed.
struct Corpus {
  TempDir dir;
  ForeignRegistry foreign;
  TaskRegistry tasks;
  std::shared_ptr<const TypedProgram> typed;
  std::unique_ptr<Store> store;
  TransientCache transients;

  explicit Corpus(const std::string& name, const std::string& pie_file) {
    copy_tree(corpus_dir() / name, dir.path());
    install_stubs(dir / "stub-bin");
    std::string source = read_file(dir / pie_file);
    ParseResult r = parse_program(source, pie_file);
    REQUIRE(r.program);
    CheckResult c = check(std::move(*r.program));
    for (const auto& d : c.diagnostics) MESSAGE(render_diagnostic(d, source, pie_file));
    REQUIRE(c.typed);
    typed = c.typed;
    register_stdlib(foreign);
    register_foreign_stubs(foreign);
    register_program(typed, foreign, tasks);
    store = Store::open(dir / ".pie-store", &foreign);
  }

  // One session; returns it so tests can inspect counts. Commits.
  struct Run {
    Session session;
    Value result;
  };
  Run run(const std::string& func, std::vector<Value> args) {
    Session s(*store, tasks, dir.path(), &transients);
    s.add_exec_path(dir / "stub-bin");
    Value v = call_entry(s, *typed, func, std::move(args));
    store->commit();
    return Run{std::move(s), std::move(v)};
  }
};

}  // namespace

TEST_CASE("sdf_editor: initial build and per-function counts") {
  Corpus c("sdf_editor", "sdf_editor.pie");
  auto r = c.run("update-editor", {Value::str("the quick fox")});
  CHECK(r.session.exec_count_for_func("update-editor") == 1);
  CHECK(r.session.exec_count_for_func("normalize") == 2);
  CHECK(r.session.exec_count_for_func("extract-deps") == 2);
  CHECK(r.session.exec_count_for_func("generate-table") == 1);
  CHECK(r.session.exec_count_for_func("table2object") == 1);
  CHECK(r.session.exec_count_for_func("parse") == 1);
  CHECK(r.session.exec_count_for_func("style") == 1);
  CHECK(r.session.total_executions() == 9);
  // result is (Styling, Msg*) with no messages
  REQUIRE(r.result.kind() == ValueKind::Tuple);
  CHECK(r.result.elems()[1] == Value::list({}));

  // generated artifacts exist
  CHECK(fs::exists(c.dir / "lexical.norm"));
  CHECK(fs::exists(c.dir / "contextfree.norm"));
  CHECK(fs::exists(c.dir / "parse.tbl"));

  auto r2 = c.run("update-editor", {Value::str("the quick fox")});
  CHECK(r2.session.total_executions() == 0);
  CHECK(r2.result == r.result);
}

TEST_CASE("sdf_editor: second buffer shares the table; buffer edits reparse only") {
  Corpus c("sdf_editor", "sdf_editor.pie");
  c.run("update-editor", {Value::str("one")});
  auto r = c.run("update-editor", {Value::str("two")});
  // new buffer: updateEditor + parse + style execute; the table pipeline is shared
  CHECK(r.session.exec_count_for_func("update-editor") == 1);
  CHECK(r.session.exec_count_for_func("parse") == 1);
  CHECK(r.session.exec_count_for_func("style") == 1);
  CHECK(r.session.exec_count_for_func("normalize") == 0);
  CHECK(r.session.exec_count_for_func("generate-table") == 0);
  CHECK(r.session.exec_count_for_func("table2object") == 0);
}

TEST_CASE("sdf_editor: changing a module re-normalizes and regenerates the table") {
  Corpus c("sdf_editor", "sdf_editor.pie");
  c.run("update-editor", {Value::str("text")});
  write_file(c.dir / "lexical.sdf", "module lexical\nimports common\nlexical syntax\n  ID = [a-z0-9]+\n");
  auto r = c.run("update-editor", {Value::str("text")});
  CHECK(r.session.exec_count_for_func("normalize") == 1);        // only the changed module
  CHECK(r.session.exec_count_for_func("generate-table") == 1);   // its .norm changed
  CHECK(r.session.exec_count_for_func("table2object") == 1);     // table text changed
  CHECK(r.session.exec_count_for_func("parse") == 1);
  CHECK(r.session.exec_count_for_func("extract-deps") == 0);     // dep list unchanged
  CHECK(r.session.exec_count_for_func("style") == 0);            // tokens derive from text only
}

TEST_CASE("sdf_editor: include file changes reach normalize through extracted deps") {
  Corpus c("sdf_editor", "sdf_editor.pie");
  c.run("update-editor", {Value::str("text")});
  write_file(c.dir / "include/common.sdf", "module common\nlexical syntax\n  LAYOUT = [\\t]\n");
  auto r = c.run("update-editor", {Value::str("text")});
  // both modules import common, so both re-normalize and the table regenerates
  CHECK(r.session.exec_count_for_func("normalize") == 2);
  CHECK(r.session.exec_count_for_func("generate-table") == 1);
}

TEST_CASE("sdf_editor: mtime-only touch of a module cuts off after normalize") {
  Corpus c("sdf_editor", "sdf_editor.pie");
  c.run("update-editor", {Value::str("text")});
  touch(c.dir / "lexical.sdf");
  auto r = c.run("update-editor", {Value::str("text")});
  // normalize re-runs (modified stamp) but rewrites identical bytes
  CHECK(r.session.exec_count_for_func("normalize") == 1);
  CHECK(r.session.exec_count_for_func("generate-table") == 0);
  CHECK(r.session.exec_count_for_func("parse") == 0);
  CHECK(r.session.exec_count_for_func("update-editor") == 0);
}

TEST_CASE("sdf_editor: determinism of clean runs") {
  std::string table1, table2, norm1, norm2;
  Value v1, v2;
  {
    Corpus c("sdf_editor", "sdf_editor.pie");
    v1 = c.run("update-editor", {Value::str("same text")}).result;
    table1 = read_file(c.dir / "parse.tbl");
    norm1 = read_file(c.dir / "lexical.norm");
  }
  {
    Corpus c("sdf_editor", "sdf_editor.pie");
    v2 = c.run("update-editor", {Value::str("same text")}).result;
    table2 = read_file(c.dir / "parse.tbl");
    norm2 = read_file(c.dir / "lexical.norm");
  }
  CHECK(table1 == table2);
  CHECK(norm1 == norm2);
  CHECK(v1 == v2);
}

TEST_CASE("workspace: project processing, minimal recomputation, styling isolation") {
  Corpus c("workspace", "workspace.pie");
  auto r = c.run("updateProject", {Value::path("./"), Value::path("./project")});
  REQUIRE(r.result.kind() == ValueKind::List);
  CHECK(r.result.elems().size() == 3);  // a.lang1, b.lang1, c.lang2; notes.txt filtered out
  int initial = r.session.total_executions();
  CHECK(initial > 10);

  // no change: nothing runs
  CHECK(c.run("updateProject", {Value::path("./"), Value::path("./project")})
            .session.total_executions() == 0);

  // changing one file reprocesses only its chain
  write_file(c.dir / "project/b.lang1", "delta prime\n");
  auto r2 = c.run("updateProject", {Value::path("./"), Value::path("./project")});
  CHECK(r2.session.exec_count_for_func("processFile") == 1);
  CHECK(r2.session.exec_count_for_func("processString") == 1);
  CHECK(r2.session.exec_count_for_func("parse") == 1);
  CHECK(r2.session.exec_count_for_func("updateFile") == 1);
  CHECK(r2.session.exec_count_for_func("sdf2table") == 0);
  CHECK(r2.session.exec_count_for_func("esv2styler") == 0);

  // changing a styling spec re-styles lang1 files without reparsing
  write_file(c.dir / "specs/lang1/main.esv", "styler lang1\n  keyword: underline\n");
  auto r3 = c.run("updateProject", {Value::path("./"), Value::path("./project")});
  CHECK(r3.session.exec_count_for_func("esv2styler") == 1);
  CHECK(r3.session.exec_count_for_func("esvStyle") == 2);  // two lang1 files
  CHECK(r3.session.exec_count_for_func("style") == 2);
  CHECK(r3.session.exec_count_for_func("parse") == 0);
  CHECK(r3.session.exec_count_for_func("jsgrParse") == 0);

  // changing the syntax spec reparses lang1 files
  write_file(c.dir / "specs/lang1/main.sdf", "module lang1\ncontext-free syntax\n  Start.U2 = ID ID\n");
  auto r4 = c.run("updateProject", {Value::path("./"), Value::path("./project")});
  CHECK(r4.session.exec_count_for_func("sdf2table") == 1);
  CHECK(r4.session.exec_count_for_func("jsgrParse") == 2);
  CHECK(r4.session.exec_count_for_func("parse") == 2);
}

TEST_CASE("workspace: parse failures yield messages and null styling") {
  Corpus c("workspace", "workspace.pie");
  write_file(c.dir / "project/a.lang1", "alpha <err> beta\n");
  auto r = c.run("updateProject", {Value::path("./"), Value::path("./project")});
  const Value& a_entry = r.result.elems()[0];
  REQUIRE(a_entry.kind() == ValueKind::Tuple);
  CHECK(a_entry.elems()[0] == Value::path("./project/a.lang1"));
  CHECK(a_entry.elems()[1].elems().size() == 1);  // one message
  CHECK(a_entry.elems()[2].is_null());            // no styling
  // the healthy files still styled
  CHECK(!r.result.elems()[1].elems()[2].is_null());
}

TEST_CASE("workspace: updateEditor processes buffer text against the file's language") {
  Corpus c("workspace", "workspace.pie");
  auto r = c.run("updateEditor", {Value::str("fresh買 text"), Value::path("./project/a.lang1"),
                                  Value::path("./")});
  REQUIRE(r.result.kind() == ValueKind::Tuple);
  CHECK(r.result.elems()[0] == Value::list({}));
  CHECK(!r.result.elems()[1].is_null());
}

TEST_CASE("benchmarks: exact matrix counts") {
  Corpus c("benchmarks", "benchmarks.pie");
  auto r = c.run("main", {Value::list({})});
  CHECK(r.session.exec_count_for_func("main") == 1);
  CHECK(r.session.exec_count_for_func("build") == 1);
  CHECK(r.session.exec_count_for_func("run_benchmark") == 14);
  CHECK(r.result.elems().size() == 14);
  CHECK(r.result.elems()[0] == Value::path("./results/set_clojure.csv"));
  CHECK(fs::exists(c.dir / "results/map_pcollections.csv"));

  // touching one subject jar's content re-runs exactly that subject's pair
  write_file(c.dir / "lib/scala.jar", "stub library jar: scala v2\n");
  auto r2 = c.run("main", {Value::list({})});
  CHECK(r2.session.total_executions() == 2);
  CHECK(r2.session.exec_count_for_func("run_benchmark") == 2);
}

TEST_CASE("transient: loader re-executes per runtime, once") {
  Corpus c("transient", "transient.pie");
  auto r = c.run("render-text", {Value::str("hello")});
  CHECK(r.session.total_executions() == 2);
  CHECK(r.result.as_str().rfind("rendered:", 0) == 0);

  // same runtime (shared cache): fully cached
  CHECK(c.run("render-text", {Value::str("hello")}).session.total_executions() == 0);

  // fresh runtime: the transient task alone re-executes when demanded
  c.transients.clear();
  auto r2 = c.run("render-text", {Value::str("hello")});
  CHECK(r2.session.total_executions() == 1);
  CHECK(r2.session.exec_count_for_func("loadTable") == 1);
  CHECK(r2.result == r.result);
}
