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
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "slt/eval_harness.hpp"
#include "slt/llm_gateway.hpp"
#include "slt/prompt.hpp"
#include "slt/prompt_optimizer.hpp"
#include "slt/tpe.hpp"

namespace slt {

// Process exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMissingTooling = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitCorruptLog = 3;

enum class Aggregation { Max, Mean };

struct GatewayConfig {
  std::string kind = "http";  // "http" or "mock"
  EndpointConfig endpoint;
  std::vector<CompletionResponse> mock_script;
};

struct CampaignConfig {
  GatewayConfig gateway;
  std::filesystem::path prompt_path;  // empty: bundled prompt with its two example programs
  LexiconPaths lexicon;
  std::string backend = "reference";  // "reference" or "gem5"
  double reference_timeout_s = kReferenceTimeoutS;
  Gem5Config gem5;
  CompileSpec compile;
  std::size_t n_trials = 1000;
  std::size_t snippets_per_trial = 5;
  Aggregation objective_aggregation = Aggregation::Max;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "campaign";
  std::size_t workers = 0;  // 0: one per CPU
  double ipc_threshold = 0.5;
  int max_new_tokens = 1024;

  // Used by `generate`, which runs outside the hyperparameter search.
  SamplingParams sampling;
  std::optional<OptPlan> optimization;
  bool include_examples = false;
};

/// Directory holding the bundled prompt and lexicon (SLT_DATA_DIR overrides).
std::filesystem::path data_dir();

/// Defaults with the bundled lexicon and the SLT_LLM_* environment applied.
CampaignConfig default_config();

/// Relative paths in `j` resolve against `base_dir`. Throws ConfigError.
CampaignConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
CampaignConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError when a field is out of range.
void validate(const CampaignConfig& config);

std::unique_ptr<Gateway> make_gateway(const CampaignConfig& config);
std::unique_ptr<SimulatorBackend> make_backend(const CampaignConfig& config);

/// Plan encoded by a trial's prompt-optimization parameters, if enabled.
std::optional<OptPlan> plan_for_trial(const TrialConfig& trial, std::uint64_t seed);

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

int cmd_generate(const CampaignConfig& config, std::size_t count, Gateway& gateway, Streams io);
int cmd_generate(const CampaignConfig& config, std::size_t count, Streams io);

int cmd_evaluate(const CampaignConfig& config, const std::filesystem::path& dir, Streams io);

/// Runs (or resumes) the search over default_slt_space(). Writes the log
/// under config.output_dir plus `stats.json` with the live statistics.
int cmd_campaign(const CampaignConfig& config, Gateway& gateway, Streams io);
int cmd_campaign(const CampaignConfig& config, Streams io);

/// Prints the statistics table and writes the JSON report (default
/// `<campaign dir>/report.json`).
int cmd_report(const std::filesystem::path& log, double ipc_threshold,
               const std::optional<std::filesystem::path>& json_out, Streams io);

int cmd_replay(const std::filesystem::path& log, Streams io);

/// Entry point of the `slt` tool.
int run_cli(int argc, char** argv);

}  // namespace slt
