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

#include <chrono>
#include <csignal>
#include <fstream>

#include "doctest.h"
#include "slt/errors.hpp"
#include "slt/subprocess.hpp"

using namespace slt;
namespace fs = std::filesystem;

TEST_SUITE("subprocess") {
  TEST_CASE("captures output and exit status") {
    const ProcessResult r = run_process({"sh", "-c", "echo out; echo err >&2; exit 3"}, {});
    CHECK(r.spawned);
    CHECK(r.exited);
    CHECK(r.exit_code == 3);
    CHECK(r.out == "out\n");
    CHECK(r.err == "err\n");
    CHECK(!r.ok());
    CHECK(run_process({"true"}, {}).ok());
  }

  TEST_CASE("reports signals") {
    const ProcessResult r = run_process({"sh", "-c", "kill -SEGV $$"}, {});
    CHECK(!r.exited);
    CHECK(r.term_signal == SIGSEGV);
  }

  TEST_CASE("missing executable is not spawned") {
    const ProcessResult r = run_process({"/nonexistent/definitely-not-here"}, {});
    CHECK(!r.spawned);
    CHECK(r.spawn_errno != 0);
    CHECK(!find_executable("definitely-not-a-command-xyz"));
    CHECK(find_executable("sh"));
  }

  TEST_CASE("timeout kills the whole process group") {
    ProcessOptions opts;
    opts.timeout_s = 0.3;
    const auto start = std::chrono::steady_clock::now();
    // The grandchild keeps the pipe open; it must die with the group.
    const ProcessResult r = run_process({"sh", "-c", "sleep 20 & sleep 20"}, opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r.timed_out);
    CHECK(!r.ok());
    CHECK(secs < 3.0);
  }

  TEST_CASE("output is capped") {
    ProcessOptions opts;
    opts.output_cap = 1000;
    const ProcessResult r = run_process({"sh", "-c", "head -c 100000 /dev/zero"}, opts);
    CHECK(r.ok());
    CHECK(r.out.size() == 1000);
  }

  TEST_CASE("stdin is closed and cwd applies") {
    TempDir dir;
    ProcessOptions opts;
    opts.cwd = dir.path();
    const ProcessResult r = run_process({"sh", "-c", "cat; pwd"}, opts);
    CHECK(r.ok());
    CHECK(fs::equivalent(fs::path(r.out.substr(0, r.out.size() - 1)), dir.path()));
  }

  TEST_CASE("command splitting and expansion") {
    CHECK(split_command("cc  -O1 'a b' \"c d\" e") == std::vector<std::string>{"cc", "-O1", "a b", "c d", "e"});
    CHECK(split_command("x \"\"") == std::vector<std::string>{"x", ""});
    CHECK_THROWS_AS(split_command("cc 'open"), ConfigError);
    CHECK(expand_command("cc {src} -o {out}", {{"src", "/t/a b.c"}, {"out", "/t/x"}}) ==
          std::vector<std::string>{"cc", "/t/a b.c", "-o", "/t/x"});
    CHECK(expand_command("--x={v}{v}", {{"v", "{v}"}}) == std::vector<std::string>{"--x={v}{v}"});
  }

  TEST_CASE("temp dirs are removed and movable") {
    fs::path kept;
    {
      TempDir a;
      kept = a.path();
      std::ofstream(a.path() / "f") << "x";
      fs::create_directories(a.path() / "sub/deeper");
      TempDir b(std::move(a));
      CHECK(a.path().empty());
      CHECK(fs::exists(b.path() / "f"));
    }
    CHECK(!fs::exists(kept));
  }
}
