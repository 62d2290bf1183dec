// Copyright 2026 The SLT Harness Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slt/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "slt/errors.hpp"

extern char** environ;

namespace slt {
namespace {

using Clock = std::chrono::steady_clock;

class FileActions {
 public:
  FileActions() { posix_spawn_file_actions_init(&fa_); }
  ~FileActions() { posix_spawn_file_actions_destroy(&fa_); }
  posix_spawn_file_actions_t* get() { return &fa_; }

 private:
  posix_spawn_file_actions_t fa_;
};

class SpawnAttr {
 public:
  SpawnAttr() { posix_spawnattr_init(&attr_); }
  ~SpawnAttr() { posix_spawnattr_destroy(&attr_); }
  posix_spawnattr_t* get() { return &attr_; }

 private:
  posix_spawnattr_t attr_;
};

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read, write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw IoError(std::string("pipe2: ") + std::strerror(errno));
  return Pipe{Fd(fds[0]), Fd(fds[1])};
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
  ProcessResult result;
  if (argv.empty()) {
    result.spawn_errno = EINVAL;
    return result;
  }
  Pipe out = make_pipe();
  Pipe err = make_pipe();

  FileActions fa;
  posix_spawn_file_actions_addopen(fa.get(), STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(fa.get(), out.write.get(), STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(fa.get(), err.write.get(), STDERR_FILENO);
  std::string cwd = options.cwd.string();
  if (!cwd.empty()) posix_spawn_file_actions_addchdir_np(fa.get(), cwd.c_str());

  SpawnAttr attr;
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  sigset_t empty;
  sigemptyset(&empty);
  posix_spawnattr_setsigdefault(attr.get(), &defaults);
  posix_spawnattr_setsigmask(attr.get(), &empty);
  posix_spawnattr_setpgroup(attr.get(), 0);
  posix_spawnattr_setflags(attr.get(),
                           POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGDEF | POSIX_SPAWN_SETSIGMASK);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const auto start = Clock::now();
  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, cargv[0], fa.get(), attr.get(), cargv.data(), environ);
  out.write.reset();
  err.write.reset();
  if (rc != 0) {
    result.spawn_errno = rc;
    result.err = std::string("cannot execute '") + argv[0] + "': " + std::strerror(rc);
    return result;
  }
  result.spawned = true;

  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(options.timeout_s));
  std::array<pollfd, 2> pfds{pollfd{out.read.get(), POLLIN, 0}, pollfd{err.read.get(), POLLIN, 0}};
  std::array<std::string*, 2> sinks{&result.out, &result.err};
  bool killed = false;
  bool reaped = false;
  int status = 0;
  std::array<char, 65536> buf{};

  while (true) {
    const bool open = pfds[0].fd >= 0 || pfds[1].fd >= 0;
    if (!open && reaped) break;
    if (!killed && Clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      killed = true;
      result.timed_out = true;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    const int wait_ms = killed ? 20 : static_cast<int>(std::clamp<long long>(remaining.count() + 1, 1, 50));
    if (open) {
      const int n = ::poll(pfds.data(), pfds.size(), wait_ms);
      if (n > 0) {
        for (std::size_t i = 0; i < pfds.size(); ++i) {
          if (pfds[i].fd < 0 || pfds[i].revents == 0) continue;
          const ssize_t got = ::read(pfds[i].fd, buf.data(), buf.size());
          if (got > 0) {
            const std::size_t room = options.output_cap - std::min(options.output_cap, sinks[i]->size());
            sinks[i]->append(buf.data(), std::min<std::size_t>(room, static_cast<std::size_t>(got)));
          } else if (got == 0 || (errno != EINTR && errno != EAGAIN)) {
            pfds[i].fd = -1;
          }
        }
      }
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(std::min(wait_ms, 5)));
    }
    if (!reaped) {
      const pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) {
        reaped = true;
        // Stragglers in the group may still hold the pipes open.
        if (open) ::kill(-pid, SIGKILL);
      }
    }
  }
  result.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  if (WIFEXITED(status)) {
    result.exited = true;
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status) && !result.timed_out) {
    result.term_signal = WTERMSIG(status);
  }
  return result;
}

std::vector<std::string> split_command(std::string_view command) {
  std::vector<std::string> args;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (char ch : command) {
    if (quote != 0) {
      if (ch == quote) {
        quote = 0;
      } else {
        cur += ch;
      }
    } else if (ch == '"' || ch == '\'') {
      quote = ch;
      have = true;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      if (have) args.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur += ch;
      have = true;
    }
  }
  if (quote != 0) throw ConfigError("unbalanced quote in command: " + std::string(command));
  if (have) args.push_back(std::move(cur));
  return args;
}

std::vector<std::string> expand_command(std::string_view command_template,
                                        const std::map<std::string, std::string>& values) {
  std::vector<std::string> args = split_command(command_template);
  for (std::string& arg : args) {
    for (const auto& [key, value] : values) {
      const std::string needle = "{" + key + "}";
      for (std::size_t at = arg.find(needle); at != std::string::npos;
           at = arg.find(needle, at + value.size())) {
        arg.replace(at, needle.size(), value);
      }
    }
  }
  return args;
}

std::optional<std::filesystem::path> find_executable(std::string_view name) {
  namespace fs = std::filesystem;
  if (name.empty()) return std::nullopt;
  auto runnable = [](const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string_view::npos) {
    fs::path p(name);
    if (runnable(p)) return fs::absolute(p);
    return std::nullopt;
  }
  const char* path_env = std::getenv("PATH");
  std::string_view dirs = path_env ? path_env : "/usr/bin:/bin";
  while (!dirs.empty()) {
    const std::size_t colon = dirs.find(':');
    const std::string_view dir = dirs.substr(0, colon);
    fs::path candidate = fs::path(dir.empty() ? "." : std::string(dir)) / std::string(name);
    if (runnable(candidate)) return candidate;
    if (colon == std::string_view::npos) break;
    dirs.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

TempDir::TempDir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const fs::path base = root.empty() ? fs::temp_directory_path() : root;
  std::error_code ec;
  fs::create_directories(base, ec);
  std::string pattern = (base / "slt-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) {
    throw IoError("mkdtemp in " + base.string() + ": " + std::strerror(errno));
  }
  path_ = pattern;
}

TempDir::~TempDir() { remove(); }

TempDir::TempDir(TempDir&& other) noexcept : path_(std::move(other.path_)) { other.path_.clear(); }

TempDir& TempDir::operator=(TempDir&& other) noexcept {
  if (this != &other) {
    remove();
    path_ = std::move(other.path_);
    other.path_.clear();
  }
  return *this;
}

void TempDir::remove() noexcept {
  if (path_.empty()) return;
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
  path_.clear();
}

}  // namespace slt
