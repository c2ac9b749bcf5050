#include <array>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "suitegen/execution.hpp"

namespace suitegen::execution {
namespace {

std::string resolve_program(const std::string& name) {
  auto executable = [](const std::string& path) {
    struct stat st {};
    return ::stat(path.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(path.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string::npos) {
    return executable(name) ? name : std::string();
  }
  const char* path_env = std::getenv("PATH");
  std::stringstream dirs(path_env ? path_env : "/usr/bin:/bin");
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    std::string candidate = (dir.empty() ? "." : dir) + "/" + name;
    if (executable(candidate)) {
      return candidate;
    }
  }
  return {};
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fds, O_CLOEXEC) != 0) {
      throw ExecutorUnavailable(std::string("pipe: ") + std::strerror(errno));
    }
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
};

} // namespace

SubprocessExecutor::SubprocessExecutor(std::vector<std::string> argv, std::chrono::milliseconds overhead,
                                       std::string identity)
    : argv_(std::move(argv)), overhead_(overhead), identity_(std::move(identity)) {
  if (argv_.empty()) {
    throw ExecutorUnavailable("runner command is empty");
  }
  auto resolved = resolve_program(argv_[0]);
  if (resolved.empty()) {
    throw ExecutorUnavailable("runner program not found or not executable: " + argv_[0]);
  }
  argv_[0] = resolved;
  if (identity_.empty()) {
    identity_ = "subprocess:";
    for (std::size_t i = 0; i < argv_.size(); ++i) {
      identity_ += (i ? " " : "") + argv_[i];
    }
  }
  std::signal(SIGPIPE, SIG_IGN);
}

RunnerOutput SubprocessExecutor::invoke(const RunnerRequest& request) {
  ++invocations_;
  const std::string input = to_json(request).dump();
  Pipe in, out, err;

  std::vector<char*> cargv;
  for (auto& a : argv_) {
    cargv.push_back(const_cast<char*>(a.c_str()));
  }
  cargv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) {
    throw ExecutorUnavailable(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in.fds[0], STDIN_FILENO);
    ::dup2(out.fds[1], STDOUT_FILENO);
    ::dup2(err.fds[1], STDERR_FILENO);
    ::execv(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in.close_read();
  out.close_write();
  err.close_write();
  set_nonblocking(in.fds[1]);
  set_nonblocking(out.fds[0]);
  set_nonblocking(err.fds[0]);

  const auto budget = std::chrono::milliseconds(request.limits.time_limit_ms *
                                                static_cast<std::int64_t>(std::max<std::size_t>(request.tests.size(), 1))) +
                      overhead_;
  const auto deadline = std::chrono::steady_clock::now() + budget;

  RunnerOutput result;
  std::size_t written = 0;
  if (input.empty()) {
    in.close_write();
  }
  std::array<char, 65536> buf{};
  while (out.fds[0] >= 0 || err.fds[0] >= 0) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      ::kill(-pid, SIGKILL);
      result.killed_by_watchdog = true;
      break;
    }
    std::vector<pollfd> fds;
    if (in.fds[1] >= 0) fds.push_back({in.fds[1], POLLOUT, 0});
    if (out.fds[0] >= 0) fds.push_back({out.fds[0], POLLIN, 0});
    if (err.fds[0] >= 0) fds.push_back({err.fds[0], POLLIN, 0});
    auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    int rc = ::poll(fds.data(), fds.size(), static_cast<int>(std::min<std::int64_t>(wait_ms + 1, 1000)));
    if (rc < 0 && errno != EINTR) {
      break;
    }
    for (const auto& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in.fds[1]) {
        ssize_t n = ::write(p.fd, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 && errno != EAGAIN) written = input.size();
        if (written >= input.size()) in.close_write();
      } else {
        ssize_t n = ::read(p.fd, buf.data(), buf.size());
        std::string& sink = p.fd == out.fds[0] ? result.stdout_data : result.stderr_data;
        if (n > 0) {
          sink.append(buf.data(), static_cast<std::size_t>(n));
        } else if (n == 0 || errno != EAGAIN) {
          if (p.fd == out.fds[0]) out.close_read(); else err.close_read();
        }
      }
    }
  }
  in.close_write();

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  if (result.exit_code == 127 && result.stdout_data.empty() && !result.killed_by_watchdog) {
    throw ExecutorUnavailable("runner could not be executed: " + argv_[0]);
  }
  return result;
}

} // namespace suitegen::execution
