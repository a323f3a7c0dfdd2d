#include "pie/stubs.hpp"

#include <unistd.h>

#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace pie {

namespace {

std::string sha_hex(const std::string& s) { return to_hex(sha256(s)); }

const BytesForeign& as_bytes_foreign(const Value& v) {
  auto* p = dynamic_cast<const BytesForeign*>(&v.foreign_obj());
  if (!p) throw TaskFailedError("unexpected foreign object representation");
  return *p;
}

Value make_foreign(std::string type, std::string payload) {
  return Value::foreign(std::make_shared<BytesForeign>(std::move(type), std::move(payload)));
}

std::string read_required(ExecContext& ctx, const std::string& pie_path) {
  ctx.require_path(pie_path, PathStamperKind::Hash);
  std::ifstream in(ctx.resolve(pie_path), std::ios::binary);
  if (!in) throw TaskFailedError("cannot read '" + pie_path + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream is(text);
  std::string w;
  while (is >> w) words.push_back(w);
  return words;
}

Value tokens_of(const std::string& text) {
  std::vector<Value> tokens;
  for (const std::string& w : split_words(text))
    tokens.push_back(make_foreign("Token", w));
  return Value::list(std::move(tokens));
}

std::string join_token_payloads(const Value& tokens) {
  std::string acc;
  for (const Value& t : tokens.elems()) {
    acc += as_bytes_foreign(t).payload();
    acc += '\xff';
  }
  return acc;
}

ForeignRegistry::DataDescriptor plain_data(std::string type_name) {
  ForeignRegistry::DataDescriptor d;
  d.decode = [type_name](std::span<const std::byte> payload) {
    std::string s(reinterpret_cast<const char*>(payload.data()), payload.size());
    return std::make_shared<BytesForeign>(type_name, std::move(s));
  };
  return d;
}

// Workspace payload: "<root>\n" then "ext=dir" lines in input order.
std::map<std::string, std::string> workspace_map(const std::string& payload) {
  std::map<std::string, std::string> out;
  std::istringstream is(payload);
  std::string line;
  std::getline(is, line);  // root line
  while (std::getline(is, line)) {
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::string path_extension(const std::string& path_text) {
  size_t slash = path_text.find_last_of('/');
  std::string name = slash == std::string::npos ? path_text : path_text.substr(slash + 1);
  size_t dot = name.find_last_of('.');
  return (dot == std::string::npos || dot == 0) ? "" : name.substr(dot + 1);
}

}  // namespace

void register_foreign_stubs(ForeignRegistry& fr) {
  // ---- data types ----
  for (const char* name :
       {"Ast", "Token", "Msg", "ParseTable", "Styling", "SyntaxStyler"})
    fr.register_data(name, plain_data(name));

  {
    ForeignRegistry::DataDescriptor ws = plain_data("Workspace");
    ws.methods["extensions"] = [](const Value& recv, std::span<const Value>) {
      std::vector<Value> exts;
      for (const auto& [ext, dir] : workspace_map(as_bytes_foreign(recv).payload()))
        exts.push_back(Value::str(ext));
      return Value::list(std::move(exts));
    };
    ws.methods["langSpec"] = [](const Value& recv, std::span<const Value> args) {
      auto map = workspace_map(as_bytes_foreign(recv).payload());
      std::string ext = path_extension(args[0].path_text());
      auto it = map.find(ext);
      if (it == map.end())
        throw TaskFailedError("no language registered for extension '" + ext + "'");
      return make_foreign("LangSpec", it->second);
    };
    fr.register_data("Workspace", std::move(ws));
  }
  {
    ForeignRegistry::DataDescriptor ls = plain_data("LangSpec");
    ls.methods["syntax"] = [](const Value& recv, std::span<const Value>) {
      return Value::path(as_bytes_foreign(recv).payload() + "/main.sdf");
    };
    ls.methods["styling"] = [](const Value& recv, std::span<const Value>) {
      return Value::path(as_bytes_foreign(recv).payload() + "/main.esv");
    };
    ls.methods["startSymbol"] = [](const Value&, std::span<const Value>) {
      return Value::str("Start");
    };
    fr.register_data("LangSpec", std::move(ls));
  }
  {
    // In-memory table object: deliberately not serializable (transient).
    ForeignRegistry::DataDescriptor to;
    to.decode = [](std::span<const std::byte>) {
      return std::shared_ptr<const ForeignObject>();  // never persisted
    };
    to.methods["render"] = [](const Value& recv, std::span<const Value> args) {
      const auto& obj = as_bytes_foreign(recv);
      return Value::str("rendered:" + obj.payload().substr(0, 8) + ":" + args[0].as_str());
    };
    fr.register_data("TableObj", std::move(to));
  }

  // ---- functions ----
  fr.register_func("extract-deps", 1, [](ExecContext& ctx, std::span<const Value> args) {
    std::string content = read_required(ctx, args[0].path_text());
    std::vector<Value> deps;
    std::istringstream is(content);
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty()) deps.push_back(Value::path(line));
    }
    return ForeignResult{Value::list(std::move(deps))};
  });

  fr.register_func("table2object", 1, [](ExecContext&, std::span<const Value> args) {
    return ForeignResult{make_foreign("ParseTable", sha_hex(args[0].as_str()))};
  });

  // Listing-2 shape: parse(text, table) -> (Ast, Token*, Msg*)
  fr.register_func("jsglr-parse", 2, [](ExecContext&, std::span<const Value> args) {
    const std::string& text = args[0].as_str();
    const std::string& table = as_bytes_foreign(args[1]).payload();
    Value ast = make_foreign("Ast", sha_hex(text + "|" + table).substr(0, 16));
    std::vector<Value> msgs;
    if (text.find("<err>") != std::string::npos)
      msgs.push_back(make_foreign("Msg", "parse error near <err>"));
    return ForeignResult{
        Value::tuple({std::move(ast), tokens_of(text), Value::list(std::move(msgs))})};
  });

  fr.register_func("style", 1, [](ExecContext&, std::span<const Value> args) {
    return ForeignResult{
        make_foreign("Styling", sha_hex(join_token_payloads(args[0])).substr(0, 16))};
  });

  fr.register_func("createWorkspace", 2, [](ExecContext&, std::span<const Value> args) {
    std::string payload = args[1].path_text() + "\n" + args[0].as_str();
    return ForeignResult{make_foreign("Workspace", std::move(payload))};
  });

  // Listing-5 shape: sdf2table(mainFile) -> ParseTable
  fr.register_func("sdf2table-object", 1, [](ExecContext& ctx, std::span<const Value> args) {
    std::string content = read_required(ctx, args[0].path_text());
    return ForeignResult{make_foreign("ParseTable", sha_hex(content))};
  });

  // Listing-5 shape: jsgrParse(text, startSymbol, table) -> (Ast?, Token*?, Msg*)
  fr.register_func("jsgrParse", 3, [](ExecContext&, std::span<const Value> args) {
    const std::string& text = args[0].as_str();
    const std::string& start = args[1].as_str();
    const std::string& table = as_bytes_foreign(args[2]).payload();
    if (text.find("<err>") != std::string::npos) {
      Value msg = make_foreign("Msg", "parse error near <err>");
      return ForeignResult{
          Value::tuple({Value::null(), Value::null(), Value::list({msg})})};
    }
    Value ast = make_foreign("Ast", sha_hex(text + "|" + start + "|" + table).substr(0, 16));
    return ForeignResult{Value::tuple({std::move(ast), tokens_of(text), Value::list({})})};
  });

  fr.register_func("esv2styler", 1, [](ExecContext& ctx, std::span<const Value> args) {
    std::string content = read_required(ctx, args[0].path_text());
    return ForeignResult{make_foreign("SyntaxStyler", sha_hex(content).substr(0, 16))};
  });

  fr.register_func("esvStyle", 2, [](ExecContext&, std::span<const Value> args) {
    std::string acc = join_token_payloads(args[0]) + "|" + as_bytes_foreign(args[1]).payload();
    return ForeignResult{make_foreign("Styling", sha_hex(acc).substr(0, 16))};
  });

  // Transient in-memory table: re-created per runtime when demanded.
  fr.register_func("load-table", 1, [](ExecContext& ctx, std::span<const Value> args) {
    std::string content = read_required(ctx, args[0].path_text());
    auto obj = std::make_shared<BytesForeign>("TableObj", sha_hex(content), false);
    return ForeignResult{Value::foreign(std::move(obj)), true};
  });
}

void install_stubs(const fs::path& dir) {
  fs::path tool;
  if (const char* env = ::getenv("PIE_STUBTOOL")) {
    tool = env;
  } else {
    std::error_code ec;
    fs::path self = fs::read_symlink("/proc/self/exe", ec);
    if (ec) throw IoError("cannot locate stub tool: " + ec.message());
    tool = self.parent_path() / "pie-stubtool";
  }
  if (!fs::exists(tool)) throw IoError("stub tool binary not found at " + tool.string());

  fs::create_directories(dir);
  for (const char* name :
       {"sdf2normalized", "sdf2table", "mvn-stub", "jmh-stub", "echo-stub", "fail-stub"}) {
    fs::path target = dir / name;
    std::error_code ec;
    fs::copy_file(tool, target, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot install stub " + target.string() + ": " + ec.message());
    fs::permissions(target,
                    fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                    fs::perm_options::add);
  }
}

}  // namespace pie
