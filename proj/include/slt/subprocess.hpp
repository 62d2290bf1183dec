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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slt {

struct ProcessOptions {
  std::filesystem::path cwd;             // empty: inherit
  double timeout_s = 10.0;               // wall clock; the whole process group is killed after
  std::size_t output_cap = 1u << 20;     // per stream; excess is drained and dropped
};

struct ProcessResult {
  bool spawned = false;
  int spawn_errno = 0;
  bool exited = false;  // normal termination
  int exit_code = -1;
  int term_signal = 0;  // nonzero if killed by a signal we did not send
  bool timed_out = false;
  std::string out;
  std::string err;
  double wall_ms = 0.0;

  bool ok() const { return spawned && exited && exit_code == 0 && !timed_out; }
};

/// Runs argv[0] (resolved through PATH) with stdin on /dev/null.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options);

/// Splits a command line on whitespace, honoring single and double quotes.
std::vector<std::string> split_command(std::string_view command);

/// Replaces `{key}` occurrences in each argument.
std::vector<std::string> expand_command(std::string_view command_template,
                                        const std::map<std::string, std::string>& values);

/// Absolute path of an executable found via PATH (or the path itself if it has a slash).
std::optional<std::filesystem::path> find_executable(std::string_view name);

// Owns a freshly created directory and removes it recursively on destruction.
class TempDir {
 public:
  /// Creates `<root>/slt-XXXXXX`; root defaults to the system temp directory.
  explicit TempDir(const std::filesystem::path& root = {});
  ~TempDir();

  TempDir(TempDir&& other) noexcept;
  TempDir& operator=(TempDir&& other) noexcept;
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  void remove() noexcept;

  std::filesystem::path path_;
};

}  // namespace slt
