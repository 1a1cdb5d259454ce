#include "weir/process.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "weir/errors.hpp"

extern char** environ;

namespace weir {

namespace {

bool scrubbed(const char* entry, const std::vector<std::string>& names) {
  const char* eq = std::strchr(entry, '=');
  if (eq == nullptr) return false;
  const std::string_view name(entry, static_cast<std::size_t>(eq - entry));
  for (const auto& n : names) {
    if (name == n) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : command) {
    if (c == ' ' || c == '\t') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

ExecResult run_process(const ExecSpec& spec) {
  if (spec.argv.empty()) {
    throw EnvError(EnvError::Kind::SpawnFailure, "empty command");
  }

  int out_pipe[2];
  int status_pipe[2];  // written only if exec fails; O_CLOEXEC otherwise
  if (pipe(out_pipe) != 0 || pipe2(status_pipe, O_CLOEXEC) != 0) {
    throw EnvError(EnvError::Kind::SpawnFailure, "pipe: " + std::string(std::strerror(errno)));
  }

  const pid_t pid = fork();
  if (pid < 0) {
    throw EnvError(EnvError::Kind::SpawnFailure, "fork: " + std::string(std::strerror(errno)));
  }

  if (pid == 0) {
    setpgid(0, 0);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(out_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);

    std::vector<char*> argv;
    argv.reserve(spec.argv.size() + 1);
    for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    std::vector<char*> envp;
    for (char** e = environ; *e != nullptr; ++e) {
      if (!scrubbed(*e, spec.scrub_env)) envp.push_back(*e);
    }
    envp.push_back(nullptr);

    if (!spec.workdir.empty() && chdir(spec.workdir.c_str()) != 0) {
      const int err = errno;
      (void)!write(status_pipe[1], &err, sizeof(err));
      _exit(127);
    }
    execvpe(argv[0], argv.data(), envp.data());
    const int err = errno;
    (void)!write(status_pipe[1], &err, sizeof(err));
    _exit(127);
  }

  close(out_pipe[1]);
  close(status_pipe[1]);

  ExecResult result;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(spec.timeout_s);
  char buffer[4096];
  bool open = true;
  while (open) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      break;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd pfd{out_pipe[0], POLLIN, 0};
    const int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 1000)));
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;
    const ssize_t n = read(out_pipe[0], buffer, sizeof(buffer));
    if (n > 0) {
      result.output.append(buffer, static_cast<std::size_t>(n));
    } else {
      open = false;
    }
  }
  // Drain whatever is left after a kill without blocking forever.
  if (result.timed_out) {
    pollfd pfd{out_pipe[0], POLLIN, 0};
    while (poll(&pfd, 1, 50) > 0) {
      const ssize_t n = read(out_pipe[0], buffer, sizeof(buffer));
      if (n <= 0) break;
      result.output.append(buffer, static_cast<std::size_t>(n));
    }
  }
  close(out_pipe[0]);

  int exec_errno = 0;
  const ssize_t got = read(status_pipe[0], &exec_errno, sizeof(exec_errno));
  close(status_pipe[0]);

  int wait_status = 0;
  waitpid(pid, &wait_status, 0);

  if (got == sizeof(exec_errno)) {
    throw EnvError(EnvError::Kind::SpawnFailure,
                   "cannot start '" + spec.argv[0] + "': " + std::strerror(exec_errno));
  }

  if (!result.timed_out) {
    if (WIFEXITED(wait_status)) {
      result.exit_status = WEXITSTATUS(wait_status);
    } else if (WIFSIGNALED(wait_status)) {
      result.exit_status = 128 + WTERMSIG(wait_status);
    }
  }
  return result;
}

}  // namespace weir
