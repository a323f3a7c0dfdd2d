#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pie {

struct ProcessResult {
  int status = 0;
  std::string out;
  std::string err;
};

// Runs argv[0] with the given arguments in `cwd`, capturing stdout/stderr.
// argv[0] containing a '/' resolves against cwd; otherwise `extra_path_dirs`
// are searched first, then the PATH environment. Throws
// ExecutableNotFoundError / IoError.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          const std::vector<std::filesystem::path>& extra_path_dirs = {});

}  // namespace pie
