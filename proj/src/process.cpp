#include "pie/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <cstring>

#include "pie/errors.hpp"

namespace fs = std::filesystem;

namespace pie {

namespace {

bool is_executable_file(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

fs::path resolve_executable(const std::string& name, const fs::path& cwd,
                            const std::vector<fs::path>& extra) {
  if (name.find('/') != std::string::npos) {
    fs::path p = fs::path(name).is_absolute() ? fs::path(name) : cwd / name;
    if (is_executable_file(p)) return p;
    throw ExecutableNotFoundError(name);
  }
  for (const fs::path& dir : extra) {
    fs::path p = dir / name;
    if (is_executable_file(p)) return p;
  }
  if (const char* path_env = ::getenv("PATH")) {
    std::string paths(path_env);
    size_t i = 0;
    while (i <= paths.size()) {
      size_t j = paths.find(':', i);
      if (j == std::string::npos) j = paths.size();
      std::string dir = paths.substr(i, j - i);
      i = j + 1;
      if (dir.empty()) continue;
      fs::path p = fs::path(dir) / name;
      if (is_executable_file(p)) return p;
    }
  }
  throw ExecutableNotFoundError(name);
}

void drain(int out_fd, int err_fd, std::string& out, std::string& err) {
  char buf[4096];
  bool out_open = true, err_open = true;
  while (out_open || err_open) {
    pollfd fds[2];
    nfds_t n = 0;
    if (out_open) fds[n++] = {out_fd, POLLIN, 0};
    if (err_open) fds[n++] = {err_fd, POLLIN, 0};
    if (::poll(fds, n, -1) < 0) {
      if (errno == EINTR) continue;
      throw IoError("poll failed while reading process output");
    }
    for (nfds_t i = 0; i < n; i++) {
      if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
      ssize_t r = ::read(fds[i].fd, buf, sizeof(buf));
      bool is_out = fds[i].fd == out_fd;
      if (r > 0) {
        (is_out ? out : err).append(buf, static_cast<size_t>(r));
      } else {
        if (is_out)
          out_open = false;
        else
          err_open = false;
      }
    }
  }
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const fs::path& cwd,
                          const std::vector<fs::path>& extra_path_dirs) {
  if (argv.empty()) throw TaskFailedError("exec needs at least one argument");
  fs::path exe = resolve_executable(argv[0], cwd, extra_path_dirs);

  int out_pipe[2], err_pipe[2];
  if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0)
    throw IoError("cannot create pipes for exec");

  pid_t pid = ::fork();
  if (pid < 0) throw IoError("fork failed");
  if (pid == 0) {
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    if (::chdir(cwd.c_str()) != 0) _exit(127);
    std::vector<char*> cargv;
    std::string exe_str = exe.string();
    cargv.push_back(exe_str.data());
    for (size_t i = 1; i < argv.size(); i++) cargv.push_back(const_cast<char*>(argv[i].c_str()));
    cargv.push_back(nullptr);
    ::execv(exe_str.c_str(), cargv.data());
    _exit(127);
  }

  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  ProcessResult result;
  drain(out_pipe[0], err_pipe[0], result.out, result.err);
  ::close(out_pipe[0]);
  ::close(err_pipe[0]);

  int wstatus = 0;
  if (::waitpid(pid, &wstatus, 0) < 0) throw IoError("waitpid failed");
  result.status = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : 128 + WTERMSIG(wstatus);
  return result;
}

}  // namespace pie
