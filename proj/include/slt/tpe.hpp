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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace slt {

struct ContinuousParam {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(const ContinuousParam&) const = default;
};

struct CategoricalParam {
  std::string name;
  std::vector<std::string> choices;

  bool operator==(const CategoricalParam&) const = default;
};

using ParamDef = std::variant<ContinuousParam, CategoricalParam>;

const std::string& param_name(const ParamDef& def);

struct SearchSpace {
  std::vector<ParamDef> params;

  const ParamDef* find(std::string_view name) const;
  bool operator==(const SearchSpace&) const = default;
};

/// Throws ConfigError on empty spaces, lo >= hi, empty/duplicate choices or duplicate names.
void validate(const SearchSpace& space);

// A real for continuous parameters, an atom for categorical ones.
using ParamValue = std::variant<double, std::string>;

struct TrialConfig {
  std::map<std::string, ParamValue> assignments;

  double real(const std::string& name) const;
  const std::string& atom(const std::string& name) const;
  bool flag(const std::string& name) const { return atom(name) == "true"; }

  bool operator==(const TrialConfig&) const = default;
};

/// Throws BoundsViolation unless `config` assigns every parameter of `space`
/// (and nothing else) a value inside its bounds or choices.
void check_in_space(const SearchSpace& space, const TrialConfig& config);

enum class TrialStatus { Completed, Failed };

std::string_view to_string(TrialStatus status);
TrialStatus parse_trial_status(std::string_view name);

struct TrialResult {
  TrialConfig config;
  double objective = 0.0;  // higher is better; Failed trials score 0
  TrialStatus status = TrialStatus::Completed;

  bool operator==(const TrialResult&) const = default;
};

struct TpeOptions {
  double gamma = 0.25;
  std::size_t n_startup = 10;
  std::size_t n_candidates = 24;

  bool operator==(const TpeOptions&) const = default;
};

struct OptimizerState {
  SearchSpace space;
  std::vector<TrialResult> history;  // append-only
  std::uint64_t seed = 0;
  TpeOptions options;

  bool operator==(const OptimizerState&) const = default;
};

/// Proposes the next configuration. A pure function of `state`.
///
/// Until `n_startup` trials have completed every parameter is drawn
/// uniformly. After that the history is split at the gamma quantile into a
/// good group (the top ceil(gamma * N) trials) and a bad group, a Parzen
/// density is fitted per parameter and group, `n_candidates` points are drawn
/// from the good densities, and the one with the largest l_good / l_bad wins.
/// Continuous densities are truncated-normal kernels with bandwidth
/// max((hi - lo) / sqrt(n), 0.001 (hi - lo)) plus one uniform component;
/// categorical densities are add-one smoothed frequencies.
TrialConfig suggest(const OptimizerState& state);

/// Appends `result`; throws BoundsViolation if its config is outside the space.
OptimizerState observe(OptimizerState state, TrialResult result);

/// Highest-objective Completed trial, earliest on ties.
std::optional<TrialResult> best_trial(std::span<const TrialResult> history);

using Objective = std::function<TrialResult(const TrialConfig&)>;

struct StudyResult {
  std::optional<TrialResult> best;
  std::vector<TrialResult> history;
};

/// Runs `n_trials` more suggest -> evaluate -> observe rounds on top of
/// `state`. A throwing objective yields a Failed trial with objective 0.
StudyResult run_study(const Objective& objective, OptimizerState state, std::size_t n_trials);

StudyResult run_study(const Objective& objective, const SearchSpace& space, std::size_t n_trials,
                      std::uint64_t seed, TpeOptions options = {});

// Parameter names of the harness search space.
namespace params {
inline constexpr const char* kTemperature = "temperature";
inline constexpr const char* kRepetitionPenalty = "repetition_penalty";
inline constexpr const char* kPromptOptEnabled = "prompt_opt_enabled";
inline constexpr const char* kPromptOptAlgorithms = "prompt_opt_algorithms";
inline constexpr const char* kOptimizeSystemPrompt = "optimize_system_prompt";
inline constexpr const char* kIncludeExamples = "include_examples";
}  // namespace params

/// Temperature, repetition penalty, and four categorical switches; the
/// algorithm choice covers every 1- and 2-element subset of the prompt
/// optimizer's algorithms, joined with '+'.
SearchSpace default_slt_space();

void to_json(nlohmann::json& j, const TrialConfig& config);
void from_json(const nlohmann::json& j, TrialConfig& config);

}  // namespace slt
