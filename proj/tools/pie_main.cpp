#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "pie/check.hpp"
#include "pie/eval.hpp"
#include "pie/parser.hpp"
#include "pie/runtime.hpp"
#include "pie/stubs.hpp"
#include "pie/watch.hpp"

namespace fs = std::filesystem;
using namespace pie;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

volatile std::sig_atomic_t g_interrupted = 0;
void on_interrupt(int) { g_interrupted = 1; }

fs::path store_path_from(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PIE_STORE"); env && *env) return env;
  return fs::path(".pie") / "store";
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct LoadedProgram {
  std::string source;
  std::shared_ptr<const TypedProgram> typed;
};

// Parses and checks; prints diagnostics. Returns nullopt and sets exit_code
// on failure.
std::optional<LoadedProgram> load_program(const fs::path& file, int& exit_code) {
  auto source = read_file(file);
  if (!source) {
    std::cerr << "pie: cannot read " << file.string() << "\n";
    exit_code = kExitUsage;
    return std::nullopt;
  }
  ParseResult parsed = parse_program(*source, file.string());
  if (!parsed.program) {
    std::cout << render_diagnostics(parsed.diagnostics, *source, file.string());
    exit_code = kExitRuntime;
    return std::nullopt;
  }
  CheckResult checked = check(std::move(*parsed.program));
  std::cout << render_diagnostics(checked.diagnostics, *source, file.string());
  if (!checked.typed) {
    exit_code = kExitRuntime;
    return std::nullopt;
  }
  return LoadedProgram{std::move(*source), checked.typed};
}

// Evaluates a constant literal expression (int, string and path literals
// without interpolation, bools, null, unit, lists/tuples of constants).
std::optional<Value> const_value(const ast::Expr& e) {
  using namespace ast;
  if (auto* i = std::get_if<Expr::IntLit>(&e.node)) return Value::integer(i->value);
  if (std::get_if<Expr::UnitLit>(&e.node)) return Value::unit();
  if (std::get_if<Expr::NullLit>(&e.node)) return Value::null();
  if (auto* b = std::get_if<Expr::BoolLit>(&e.node)) return Value::boolean(b->value);
  if (auto* s = std::get_if<Expr::StrInterp>(&e.node)) {
    std::string text;
    for (const InterpPart& p : s->parts) {
      auto* t = std::get_if<std::string>(&p);
      if (!t) return std::nullopt;
      text += *t;
    }
    return Value::str(text);
  }
  if (auto* p = std::get_if<Expr::PathLit>(&e.node)) {
    std::string text(p->relative ? "./" : "/");
    for (const InterpPart& part : p->parts) {
      auto* t = std::get_if<std::string>(&part);
      if (!t) return std::nullopt;
      text += *t;
    }
    return Value::path(text);
  }
  if (auto* l = std::get_if<Expr::ListLit>(&e.node)) {
    std::vector<Value> elems;
    for (const ExprPtr& el : l->elems) {
      auto v = const_value(*el);
      if (!v) return std::nullopt;
      elems.push_back(std::move(*v));
    }
    return Value::list(std::move(elems));
  }
  if (auto* t = std::get_if<Expr::TupleLit>(&e.node)) {
    std::vector<Value> elems;
    for (const ExprPtr& el : t->elems) {
      auto v = const_value(*el);
      if (!v) return std::nullopt;
      elems.push_back(std::move(*v));
    }
    return Value::tuple(std::move(elems));
  }
  return std::nullopt;
}

std::optional<std::vector<Value>> parse_literal_args(const std::vector<std::string>& raw) {
  std::vector<Value> out;
  for (const std::string& arg : raw) {
    ParseExprResult parsed = parse_expression(arg);
    std::optional<Value> v;
    if (parsed.expr) v = const_value(*parsed.expr);
    if (!v) {
      std::cerr << "pie: argument is not a pie literal: " << arg << "\n";
      return std::nullopt;
    }
    out.push_back(std::move(*v));
  }
  return out;
}

struct RunSetup {
  ForeignRegistry foreign;
  TaskRegistry tasks;
  std::unique_ptr<Store> store;
  std::shared_ptr<const TypedProgram> typed;
  fs::path working_dir;
};

// Shared by run and watch: program + stdlib + stub foreign plugins + store.
// Heap-allocated: the task registry and store keep pointers into the setup.
std::unique_ptr<RunSetup> setup_run(const fs::path& program, const std::string& store_flag,
                                    const std::string& cwd_flag, int& exit_code) {
  auto setup = std::make_unique<RunSetup>();
  auto loaded = load_program(program, exit_code);
  if (!loaded) {
    exit_code = kExitUsage;  // for run/watch, unparseable programs are usage errors
    return nullptr;
  }
  setup->typed = loaded->typed;
  setup->working_dir =
      cwd_flag.empty() ? fs::absolute(program).parent_path() : fs::absolute(cwd_flag);

  register_stdlib(setup->foreign);
  register_foreign_stubs(setup->foreign);
  try {
    register_program(setup->typed, setup->foreign, setup->tasks);
  } catch (const UnresolvedForeignError& e) {
    std::cerr << "pie: " << e.what() << "\n";
    exit_code = kExitUsage;
    return nullptr;
  }

  fs::path store_path = store_path_from(store_flag);
  if (store_path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(store_path.parent_path(), ec);
  }
  try {
    setup->store = Store::open(store_path, &setup->foreign);
  } catch (const PieError& e) {
    std::cerr << "pie: " << e.what() << "\n";
    exit_code = kExitUsage;
    return nullptr;
  }
  return setup;
}

// Runs one session; prints result and execution count; commits on success.
int run_once(RunSetup& setup, const std::string& func, const std::vector<Value>& args,
             TransientCache* transients) {
  Session session(*setup.store, setup.tasks, setup.working_dir, transients);
  try {
    Value result = call_entry(session, *setup.typed, func, args);
    std::cout << result.display() << "\n";
    std::cout << "executed " << session.total_executions() << " task(s)" << std::endl;
    setup.store->commit();
    return kExitOk;
  } catch (const ArgumentMismatchError& e) {
    std::cerr << "pie: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownFunctionError& e) {
    std::cerr << "pie: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PieError& e) {
    std::cerr << "pie: " << e.what() << "\n";
    setup.store->rollback();
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pie — incremental, persistent pipeline runner"};
  app.require_subcommand(1);

  std::string program, func, store_flag, cwd_flag, format = "dot";
  std::vector<std::string> raw_args;
  unsigned interval_ms = 500;

  CLI::App* cmd_check = app.add_subcommand("check", "Parse and type-check a pipeline program");
  cmd_check->add_option("file", program, "pie source file")->required();

  CLI::App* cmd_run = app.add_subcommand("run", "Run a pipeline function incrementally");
  cmd_run->add_option("file", program, "pie source file")->required();
  cmd_run->add_option("func", func, "entry function")->required();
  cmd_run->allow_extras();  // entry arguments as pie literals
  cmd_run->add_option("--store", store_flag, "store file (default ./.pie/store or $PIE_STORE)");
  cmd_run->add_option("--cwd", cwd_flag, "working directory (default: program directory)");

  CLI::App* cmd_clean = app.add_subcommand("clean", "Delete the persistent store");
  cmd_clean->add_option("--store", store_flag, "store file");

  CLI::App* cmd_graph = app.add_subcommand("graph", "Export the dependency graph");
  cmd_graph->add_option("--store", store_flag, "store file");
  cmd_graph->add_option("--format", format, "output format")->check(CLI::IsMember({"dot"}));

  CLI::App* cmd_watch = app.add_subcommand("watch", "Run, then re-run whenever stamps change");
  cmd_watch->add_option("file", program, "pie source file")->required();
  cmd_watch->add_option("func", func, "entry function")->required();
  cmd_watch->allow_extras();  // entry arguments as pie literals
  cmd_watch->add_option("--store", store_flag, "store file");
  cmd_watch->add_option("--cwd", cwd_flag, "working directory");
  cmd_watch->add_option("--interval", interval_ms, "poll interval in ms (>= 10)")
      ->check(CLI::Range(10u, 3600000u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (cmd_run->parsed()) raw_args = cmd_run->remaining();
  if (cmd_watch->parsed()) raw_args = cmd_watch->remaining();

  if (cmd_check->parsed()) {
    int exit_code = kExitOk;
    if (!load_program(program, exit_code)) return exit_code;
    return kExitOk;
  }

  if (cmd_clean->parsed()) {
    fs::path store_path = store_path_from(store_flag);
    std::error_code ec;
    fs::remove(store_path, ec);
    if (ec) {
      std::cerr << "pie: cannot remove " << store_path.string() << ": " << ec.message() << "\n";
      return kExitUsage;
    }
    fs::path lock = store_path;
    lock += ".lock";
    fs::remove(lock, ec);
    return kExitOk;
  }

  if (cmd_graph->parsed()) {
    fs::path store_path = store_path_from(store_flag);
    if (!fs::exists(store_path)) {
      std::cerr << "pie: no store at " << store_path.string() << "\n";
      return kExitUsage;
    }
    ForeignRegistry stubs;
    register_foreign_stubs(stubs);
    OpaqueCodec codec(&stubs);
    try {
      auto store = Store::open(store_path, &codec);
      std::cout << export_dep_graph(*store).to_dot();
    } catch (const PieError& e) {
      std::cerr << "pie: " << e.what() << "\n";
      return kExitUsage;
    }
    return kExitOk;
  }

  // run / watch
  int exit_code = kExitOk;
  std::unique_ptr<RunSetup> setup = setup_run(program, store_flag, cwd_flag, exit_code);
  if (!setup) return exit_code;
  auto args = parse_literal_args(raw_args);
  if (!args) return kExitUsage;

  if (cmd_run->parsed()) return run_once(*setup, func, *args, nullptr);

  // watch: one long-lived transient cache across sessions
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  TransientCache transients;
  int rc = run_once(*setup, func, *args, &transients);
  if (rc == kExitUsage) return rc;
  while (!g_interrupted) {
    unsigned slept = 0;
    while (slept < interval_ms && !g_interrupted) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
      slept += 10;
    }
    if (g_interrupted) break;
    try {
      if (any_stamp_changed(*setup->store, setup->working_dir)) {
        rc = run_once(*setup, func, *args, &transients);
        if (rc == kExitUsage) return rc;
      }
    } catch (const PieError& e) {
      std::cerr << "pie: " << e.what() << "\n";
    }
  }
  setup->store->commit();
  return kExitOk;
}
