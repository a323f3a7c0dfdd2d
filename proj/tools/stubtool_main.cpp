// Deterministic stand-ins for the external tools the corpus pipelines
// invoke: an SDF normalizer, a parse table generator, a build tool and a
// benchmark harness. Behavior is a pure function of argv and input file
// bytes, so hash stamps enable early cutoff in tests.
//
// The binary dispatches on its invocation name; `pie-stubtool <name> ...`
// also works.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pie/bytes.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << p.string() << "\n";
    exit(1);
  }
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "cannot write " << p.string() << "\n";
    exit(1);
  }
  out << content;
}

std::string sha_hex(const std::string& s) { return pie::to_hex(pie::sha256(s)); }

bool is_comment_line(const std::string& line) {
  size_t i = line.find_first_not_of(" \t");
  return i != std::string::npos && line.compare(i, 2, "//") == 0;
}

std::string strip_comment_lines(const std::string& text) {
  std::istringstream is(text);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line)) {
    if (!is_comment_line(line)) os << line << "\n";
  }
  return os.str();
}

// sdf2normalized <file> [-I<dir>...] -o<norm> -d<dep>
// Normalization: copy the input and append the content of every resolved
// `imports <name>` module; the dep file lists the modules actually read.
int run_sdf2normalized(const std::vector<std::string>& args) {
  std::string input, norm_out, dep_out;
  std::vector<std::string> include_dirs;
  for (const std::string& a : args) {
    if (a.rfind("-I", 0) == 0) include_dirs.push_back(a.substr(2));
    else if (a.rfind("-o", 0) == 0) norm_out = a.substr(2);
    else if (a.rfind("-d", 0) == 0) dep_out = a.substr(2);
    else input = a;
  }
  if (input.empty() || norm_out.empty() || dep_out.empty()) {
    std::cerr << "usage: sdf2normalized <file> [-I<dir>...] -o<norm> -d<dep>\n";
    return 2;
  }
  std::string content = read_file(input);
  std::ostringstream norm, dep;
  norm << "normalized:" << "\n" << content;
  std::istringstream is(content);
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string kw, mod;
    ls >> kw >> mod;
    if (kw != "imports" || mod.empty()) continue;
    for (const std::string& dir : include_dirs) {
      fs::path candidate = fs::path(dir) / (mod + ".sdf");
      if (fs::exists(candidate)) {
        norm << "module " << mod << ":\n" << read_file(candidate);
        dep << dir << "/" << mod << ".sdf" << "\n";
        break;
      }
    }
  }
  write_file(norm_out, norm.str());
  write_file(dep_out, dep.str());
  return 0;
}

// sdf2table <norm>... -o<out>
int run_sdf2table(const std::vector<std::string>& args) {
  std::vector<std::string> inputs;
  std::string out;
  for (const std::string& a : args) {
    if (a.rfind("-o", 0) == 0) out = a.substr(2);
    else inputs.push_back(a);
  }
  if (inputs.empty() || out.empty()) {
    std::cerr << "usage: sdf2table <norm>... -o<out>\n";
    return 2;
  }
  std::string acc;
  for (const std::string& in : inputs) acc += read_file(in);
  write_file(out, "PARSETABLE-v1\n" + sha_hex(acc) + "\n");
  return 0;
}

// mvn-stub verify -f <pom>
// Builds ./target/benchmarks.jar from <pom> and ./src/**/*.{java,scala}.
// Comment-only source lines do not change the jar.
int run_mvn(const std::vector<std::string>& args) {
  std::string pom = "pom.xml";
  for (size_t i = 0; i < args.size(); i++)
    if (args[i] == "-f" && i + 1 < args.size()) pom = args[i + 1];
  std::string acc = "JAR-v1\n" + strip_comment_lines(read_file(pom));
  std::vector<fs::path> sources;
  if (fs::exists("src")) {
    for (const auto& e : fs::recursive_directory_iterator("src")) {
      if (!e.is_regular_file()) continue;
      std::string ext = e.path().extension().string();
      if (ext == ".java" || ext == ".scala") sources.push_back(e.path());
    }
  }
  std::sort(sources.begin(), sources.end());
  for (const fs::path& s : sources)
    acc += s.string() + "\n" + strip_comment_lines(read_file(s));
  write_file("target/benchmarks.jar", acc);
  std::cout << "BUILD SUCCESS\n";
  return 0;
}

// jmh-stub -jar <jar> <benchPattern> -p subject=<id> [extra...] -rff <csv>
int run_jmh(const std::vector<std::string>& args) {
  std::string jar, csv, subject, pattern;
  std::vector<std::string> extra;
  for (size_t i = 0; i < args.size(); i++) {
    if (args[i] == "-jar" && i + 1 < args.size()) jar = args[++i];
    else if (args[i] == "-rff" && i + 1 < args.size()) csv = args[++i];
    else if (args[i] == "-p" && i + 1 < args.size()) subject = args[++i];
    else if (pattern.empty()) pattern = args[i];
    else extra.push_back(args[i]);
  }
  if (jar.empty() || csv.empty()) {
    std::cerr << "usage: jmh-stub -jar <jar> <pattern> -p subject=<id> [...] -rff <csv>\n";
    return 2;
  }
  std::string jar_digest = sha_hex(read_file(jar)).substr(0, 16);
  std::ostringstream row;
  row << pattern << "|" << subject << "|" << jar_digest;
  for (const std::string& e : extra) row << "|" << e;
  uint64_t score = pie::fnv1a64(row.str()) % 10000;
  write_file(csv, "Benchmark,Mode,Score\n" + row.str() + ",avgt," + std::to_string(score) + "\n");
  return 0;
}

int run_echo(const std::vector<std::string>& args) {
  for (size_t i = 0; i < args.size(); i++) std::cout << (i ? " " : "") << args[i];
  std::cout << "\n";
  return 0;
}

int run_fail(const std::vector<std::string>&) {
  std::cerr << "fail-stub: always fails\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::string name = fs::path(argv[0]).filename().string();
  std::vector<std::string> args(argv + 1, argv + argc);
  if (name == "pie-stubtool") {
    if (args.empty()) {
      std::cerr << "usage: pie-stubtool <personality> [args...]\n";
      return 2;
    }
    name = args.front();
    args.erase(args.begin());
  }
  if (name == "sdf2normalized") return run_sdf2normalized(args);
  if (name == "sdf2table") return run_sdf2table(args);
  if (name == "mvn-stub") return run_mvn(args);
  if (name == "jmh-stub") return run_jmh(args);
  if (name == "echo-stub") return run_echo(args);
  if (name == "fail-stub") return run_fail(args);
  std::cerr << "unknown stub personality: " << name << "\n";
  return 2;
}
