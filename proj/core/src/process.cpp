// Copyright 2026 The vidsum Authors
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

#include "process.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <climits>
#include <cstring>
#include <filesystem>

#include "vidsum/errors.hpp"

namespace vidsum::detail {

ProcessResult run_process(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error("run_process: empty argument vector");

  int out_pipe[2];
  int err_pipe[2];  // reports exec failure back to the parent
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    throw Error(std::string("pipe failed: ") + std::strerror(errno));
  }
  fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& arg : argv) cargv.push_back(const_cast<char*>(arg.c_str()));
  cargv.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) throw Error(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(out_pipe[1], STDOUT_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    execvp(cargv[0], cargv.data());
    const int code = errno;
    [[maybe_unused]] auto n = write(err_pipe[1], &code, sizeof code);
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);

  ProcessResult result;
  std::array<char, 8192> buf;
  for (;;) {
    const ssize_t n = read(out_pipe[0], buf.data(), buf.size());
    if (n > 0) {
      result.out.append(buf.data(), static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  close(out_pipe[0]);

  int exec_errno = 0;
  const ssize_t got = read(err_pipe[0], &exec_errno, sizeof exec_errno);
  close(err_pipe[0]);

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (got == static_cast<ssize_t>(sizeof exec_errno)) {
    throw Error("cannot start '" + argv.front() + "': " + std::strerror(exec_errno));
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

std::string self_directory() {
  std::array<char, PATH_MAX> buf{};
  const ssize_t n = readlink("/proc/self/exe", buf.data(), buf.size() - 1);
  if (n <= 0) return {};
  return std::filesystem::path(std::string(buf.data(), static_cast<std::size_t>(n)))
      .parent_path()
      .string();
}

}  // namespace vidsum::detail
