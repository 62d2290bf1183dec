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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "slt/snippet_extractor.hpp"
#include "slt/subprocess.hpp"

namespace slt {

// ---------------------------------------------------------------------------
// Compilation

struct CompileSpec {
  // Must contain {src} and {out} exactly once each.
  std::string command_template = "cc -O1 -static -w {src} -o {out}";
  double timeout_s = 60.0;
  // Parent of the per-snippet working directories; empty means the system temp dir.
  std::filesystem::path temp_root;

  static CompileSpec host();
  /// Cross-compiles for a RISC-V Linux target, for use with the gem5 backend.
  static CompileSpec riscv();
  /// "host" or "riscv"; throws ConfigError otherwise.
  static CompileSpec profile(std::string_view name);
};

void validate(const CompileSpec& spec);

/// Error message when the compiler named by the template cannot be found.
std::optional<std::string> check_compiler(const CompileSpec& spec);

enum class CompileErrorKind { NonZeroExit, Timeout, MissingToolchain };

struct CompileError {
  CompileErrorKind kind = CompileErrorKind::NonZeroExit;
  std::string diagnostic;
};

// A compiled snippet. Owns its working directory, which goes away with it.
struct CompiledBinary {
  TempDir workdir;
  std::filesystem::path binary;
};

using CompileResult = std::variant<CompiledBinary, CompileError>;

/// Writes `source` into a fresh directory and runs the compile command there.
CompileResult compile_snippet(std::string_view source, const CompileSpec& spec);

// ---------------------------------------------------------------------------
// Simulation

enum class SimStatus { Ok, Crash, Timeout, SimError };

std::string_view to_string(SimStatus status);
SimStatus parse_sim_status(std::string_view name);

struct SimOutcome {
  SimStatus status = SimStatus::SimError;
  std::optional<double> ipc;  // present iff status == Ok
  std::optional<std::string> raw_stats;
  double wall_ms = 0.0;
  std::string diagnostic;

  bool operator==(const SimOutcome&) const = default;
};

/// Issue width of the reference core; no backend result may exceed it.
inline constexpr double kReferenceIssueWidth = 3.0;

struct Gem5Config {
  std::string gem5_bin;
  std::string config_script;
  std::string command_template =
      R"("{gem5_bin}" "{config_script}" --cmd "{binary}" --abs-max-tick {ticks})";
  std::uint64_t ticks = 1'000'000'000;  // one simulated millisecond
  std::string ipc_key = "system.cpu.ipc";
  std::string stats_file = "m5out/stats.txt";  // relative to the run directory
  std::vector<std::string> crash_patterns = {"panic", "fault", "Segmentation"};
  double timeout_s = 600.0;
  std::filesystem::path temp_root;
};

/// Value of `key` in a gem5 stats dump (`key  value  # comment` lines). The
/// last occurrence wins when the file holds several dumps; nan/inf count as absent.
std::optional<double> parse_stats_ipc(std::string_view stats_text, std::string_view key);

SimOutcome run_gem5(const std::filesystem::path& binary, const Gem5Config& config);

struct ReferenceFeatures {
  std::size_t arithmetic_ops = 0;  // + - * / % tokens, incl. compound and ++/-- forms
  bool has_loop = false;           // for / while / do keyword
  std::uint64_t hash = 0;          // FNV-1a of the whitespace-normalized source
};

/// Collapses whitespace runs to one space and trims the ends.
std::string normalize_whitespace(std::string_view source);

// Lexical scan that ignores comments, string and character literals and
// preprocessor directive lines.
ReferenceFeatures reference_features(std::string_view source);

/// clamp(0.10 + 0.02 A + 0.40 L + 0.40 [A >= 8] + 0.001 (h mod 200), 0, 3).
double reference_ipc(std::string_view source);

inline constexpr double kReferenceTimeoutS = 2.0;

// Runs the host binary for real (signal -> Crash, wall timeout -> Timeout)
// and, on a normal exit, reports the analytic IPC of `source`.
SimOutcome run_reference(std::string_view source, const std::filesystem::path& binary,
                         double timeout_s = kReferenceTimeoutS);

class SimulatorBackend {
 public:
  virtual ~SimulatorBackend() = default;
  virtual std::string_view name() const = 0;
  virtual SimOutcome run(std::string_view source, const std::filesystem::path& binary) const = 0;
  /// Message describing missing tooling, if any.
  virtual std::optional<std::string> check_tooling() const = 0;
};

class ReferenceBackend final : public SimulatorBackend {
 public:
  explicit ReferenceBackend(double timeout_s = kReferenceTimeoutS) : timeout_s_(timeout_s) {}
  std::string_view name() const override { return "reference"; }
  SimOutcome run(std::string_view source, const std::filesystem::path& binary) const override;
  std::optional<std::string> check_tooling() const override { return std::nullopt; }

 private:
  double timeout_s_;
};

class Gem5Backend final : public SimulatorBackend {
 public:
  explicit Gem5Backend(Gem5Config config) : config_(std::move(config)) {}
  std::string_view name() const override { return "gem5"; }
  SimOutcome run(std::string_view source, const std::filesystem::path& binary) const override;
  std::optional<std::string> check_tooling() const override;
  const Gem5Config& config() const { return config_; }

 private:
  Gem5Config config_;
};

// ---------------------------------------------------------------------------
// Evaluation

enum class FailureClass { CompileError, SimCrash, SimTimeout, ParseFailure, Refusal, Incomplete, None };

std::string_view to_string(FailureClass failure);
FailureClass parse_failure_class(std::string_view name);

inline constexpr FailureClass kAllFailureClasses[] = {
    FailureClass::CompileError, FailureClass::SimCrash,   FailureClass::SimTimeout,
    FailureClass::ParseFailure, FailureClass::Refusal,    FailureClass::Incomplete,
    FailureClass::None};

struct EvalRecord {
  std::string snippet_id;
  ExtractionStatus extraction = ExtractionStatus::Empty;
  bool compile_ok = false;
  std::optional<SimOutcome> outcome;
  FailureClass failure = FailureClass::ParseFailure;
  std::optional<double> ipc;  // present iff failure == None
  std::string diagnostic;

  bool operator==(const EvalRecord&) const = default;
};

void to_json(nlohmann::json& j, const EvalRecord& record);
void from_json(const nlohmann::json& j, EvalRecord& record);

/// Text stored for a snippet: the extracted code, or the raw response when there is none.
std::string snippet_body(const ExtractionResult& extraction, std::string_view raw_response);

// Refusal/Empty short-circuit without compiling. A compile failure of an
// Unterminated snippet is Incomplete. SimError is folded into SimCrash.
EvalRecord evaluate_snippet(const ExtractionResult& extraction, const SimulatorBackend& backend,
                            const CompileSpec& compile_spec, std::string_view snippet_id = {});

/// Evaluates on `workers` threads (0 = hardware concurrency); output order matches input.
std::vector<EvalRecord> evaluate_batch(std::span<const ExtractionResult> extractions,
                                       std::span<const std::string> snippet_ids,
                                       const SimulatorBackend& backend,
                                       const CompileSpec& compile_spec, std::size_t workers = 0);

}  // namespace slt
