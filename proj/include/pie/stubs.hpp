#pragma once

#include <filesystem>

#include "pie/eval.hpp"

namespace pie {

// In-process foreign implementations standing in for the external language
// tooling the corpus pipelines bind against: dependency extraction, parse
// table objects, parsing, styling, workspace configuration.
void register_foreign_stubs(ForeignRegistry& fr);

// Copies the stub tool binary into `dir` under its personalities
// (sdf2normalized, sdf2table, mvn-stub, jmh-stub, echo-stub, fail-stub).
// The binary is located via $PIE_STUBTOOL or next to the current executable.
void install_stubs(const std::filesystem::path& dir);

}  // namespace pie
