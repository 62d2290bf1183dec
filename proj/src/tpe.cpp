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

#include "slt/tpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "slt/errors.hpp"
#include "slt/prompt_optimizer.hpp"
#include "slt/random.hpp"

namespace slt {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double bandwidth(const ContinuousParam& p, std::size_t n) {
  const double width = p.hi - p.lo;
  if (n == 0) return width;
  return std::max(width / std::sqrt(static_cast<double>(n)), 0.001 * width);
}

// Parzen density over one continuous parameter: one truncated-normal kernel
// per observation plus a uniform prior, all weighted equally.
struct ContinuousDensity {
  const ContinuousParam* param;
  std::vector<double> centers;
  double bw;

  double log_pdf(double x) const {
    const double width = param->hi - param->lo;
    double sum = 1.0 / width;
    for (double mu : centers) {
      const double mass =
          std_normal_cdf((param->hi - mu) / bw) - std_normal_cdf((param->lo - mu) / bw);
      const double z = (x - mu) / bw;
      sum += std::exp(-0.5 * z * z) / (bw * std::sqrt(2.0 * std::numbers::pi) * std::max(mass, 1e-300));
    }
    return std::log(sum / static_cast<double>(centers.size() + 1));
  }

  double sample(Rng& rng) const {
    const std::size_t k = rng.index(centers.size() + 1);
    if (k == centers.size()) return rng.uniform(param->lo, param->hi);
    const double mu = centers[k];
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double x = mu + bw * rng.normal();
      if (x >= param->lo && x <= param->hi) return x;
    }
    return std::clamp(mu, param->lo, param->hi);
  }
};

struct CategoricalDensity {
  const CategoricalParam* param;
  std::vector<double> probs;

  double log_pdf(const std::string& atom) const {
    const auto it = std::find(param->choices.begin(), param->choices.end(), atom);
    return std::log(probs[static_cast<std::size_t>(it - param->choices.begin())]);
  }

  const std::string& sample(Rng& rng) const {
    double u = rng.uniform01();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (u < probs[i]) return param->choices[i];
      u -= probs[i];
    }
    return param->choices.back();
  }
};

using Density = std::variant<ContinuousDensity, CategoricalDensity>;

Density fit(const ParamDef& def, const std::vector<const TrialResult*>& group) {
  return std::visit(
      overloaded{
          [&](const ContinuousParam& p) -> Density {
            ContinuousDensity d{&p, {}, 0.0};
            for (const TrialResult* t : group) d.centers.push_back(t->config.real(p.name));
            d.bw = bandwidth(p, d.centers.size());
            return d;
          },
          [&](const CategoricalParam& p) -> Density {
            CategoricalDensity d{&p, std::vector<double>(p.choices.size(), 1.0)};
            for (const TrialResult* t : group) {
              const auto& atom = t->config.atom(p.name);
              const auto it = std::find(p.choices.begin(), p.choices.end(), atom);
              d.probs[static_cast<std::size_t>(it - p.choices.begin())] += 1.0;
            }
            const double total = static_cast<double>(group.size() + p.choices.size());
            for (double& v : d.probs) v /= total;
            return d;
          }},
      def);
}

ParamValue sample_uniform(const ParamDef& def, Rng& rng) {
  return std::visit(overloaded{[&](const ContinuousParam& p) -> ParamValue {
                                 return rng.uniform(p.lo, p.hi);
                               },
                               [&](const CategoricalParam& p) -> ParamValue {
                                 return p.choices[rng.index(p.choices.size())];
                               }},
                    def);
}

ParamValue sample_density(const Density& d, Rng& rng) {
  return std::visit(overloaded{[&](const ContinuousDensity& c) -> ParamValue { return c.sample(rng); },
                               [&](const CategoricalDensity& c) -> ParamValue {
                                 return c.sample(rng);
                               }},
                    d);
}

double log_pdf(const Density& d, const ParamValue& v) {
  return std::visit(overloaded{[&](const ContinuousDensity& c) { return c.log_pdf(std::get<double>(v)); },
                               [&](const CategoricalDensity& c) {
                                 return c.log_pdf(std::get<std::string>(v));
                               }},
                    d);
}

}  // namespace

const std::string& param_name(const ParamDef& def) {
  return std::visit([](const auto& p) -> const std::string& { return p.name; }, def);
}

const ParamDef* SearchSpace::find(std::string_view name) const {
  for (const ParamDef& def : params) {
    if (param_name(def) == name) return &def;
  }
  return nullptr;
}

void validate(const SearchSpace& space) {
  if (space.params.empty()) throw ConfigError("search space has no parameters");
  std::set<std::string> names;
  for (const ParamDef& def : space.params) {
    if (!names.insert(param_name(def)).second) {
      throw ConfigError("duplicate parameter '" + param_name(def) + "'");
    }
    std::visit(overloaded{[](const ContinuousParam& p) {
                            if (!(p.lo < p.hi) || !std::isfinite(p.lo) || !std::isfinite(p.hi)) {
                              throw ConfigError("parameter '" + p.name + "' needs lo < hi");
                            }
                          },
                          [](const CategoricalParam& p) {
                            if (p.choices.empty()) {
                              throw ConfigError("parameter '" + p.name + "' has no choices");
                            }
                            std::set<std::string> seen(p.choices.begin(), p.choices.end());
                            if (seen.size() != p.choices.size()) {
                              throw ConfigError("parameter '" + p.name + "' repeats a choice");
                            }
                          }},
               def);
  }
}

double TrialConfig::real(const std::string& name) const {
  const auto it = assignments.find(name);
  if (it == assignments.end() || !std::holds_alternative<double>(it->second)) {
    throw BoundsViolation("no real value for '" + name + "'");
  }
  return std::get<double>(it->second);
}

const std::string& TrialConfig::atom(const std::string& name) const {
  const auto it = assignments.find(name);
  if (it == assignments.end() || !std::holds_alternative<std::string>(it->second)) {
    throw BoundsViolation("no categorical value for '" + name + "'");
  }
  return std::get<std::string>(it->second);
}

void check_in_space(const SearchSpace& space, const TrialConfig& config) {
  if (config.assignments.size() != space.params.size()) {
    throw BoundsViolation("config assigns " + std::to_string(config.assignments.size()) +
                          " parameters, space has " + std::to_string(space.params.size()));
  }
  for (const ParamDef& def : space.params) {
    const auto it = config.assignments.find(param_name(def));
    if (it == config.assignments.end()) {
      throw BoundsViolation("config is missing '" + param_name(def) + "'");
    }
    std::visit(overloaded{[&](const ContinuousParam& p) {
                            const auto* v = std::get_if<double>(&it->second);
                            if (v == nullptr || !(*v >= p.lo && *v <= p.hi)) {
                              throw BoundsViolation("'" + p.name + "' outside [" +
                                                    std::to_string(p.lo) + ", " +
                                                    std::to_string(p.hi) + "]");
                            }
                          },
                          [&](const CategoricalParam& p) {
                            const auto* v = std::get_if<std::string>(&it->second);
                            if (v == nullptr ||
                                std::find(p.choices.begin(), p.choices.end(), *v) == p.choices.end()) {
                              throw BoundsViolation("'" + p.name + "' is not one of its choices");
                            }
                          }},
               def);
  }
}

std::string_view to_string(TrialStatus status) {
  return status == TrialStatus::Completed ? "completed" : "failed";
}

TrialStatus parse_trial_status(std::string_view name) {
  if (name == "completed") return TrialStatus::Completed;
  if (name == "failed") return TrialStatus::Failed;
  throw ConfigError("unknown trial status '" + std::string(name) + "'");
}

TrialConfig suggest(const OptimizerState& state) {
  const SearchSpace& space = state.space;
  Rng rng(mix_seed(state.seed, state.history.size()));
  const auto completed = static_cast<std::size_t>(
      std::count_if(state.history.begin(), state.history.end(),
                    [](const TrialResult& t) { return t.status == TrialStatus::Completed; }));

  TrialConfig out;
  if (completed < state.options.n_startup || state.history.empty()) {
    for (const ParamDef& def : space.params) out.assignments[param_name(def)] = sample_uniform(def, rng);
    return out;
  }

  std::vector<const TrialResult*> ranked;
  ranked.reserve(state.history.size());
  for (const TrialResult& t : state.history) ranked.push_back(&t);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const TrialResult* a, const TrialResult* b) { return a->objective > b->objective; });
  const auto n_good = std::min(
      ranked.size(),
      static_cast<std::size_t>(std::ceil(state.options.gamma * static_cast<double>(ranked.size()))));
  const std::vector<const TrialResult*> good(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n_good));
  const std::vector<const TrialResult*> bad(ranked.begin() + static_cast<std::ptrdiff_t>(n_good), ranked.end());

  std::vector<Density> l_good;
  std::vector<Density> l_bad;
  for (const ParamDef& def : space.params) {
    l_good.push_back(fit(def, good));
    l_bad.push_back(fit(def, bad));
  }

  double best_score = -std::numeric_limits<double>::infinity();
  const std::size_t n_candidates = std::max<std::size_t>(1, state.options.n_candidates);
  for (std::size_t c = 0; c < n_candidates; ++c) {
    TrialConfig candidate;
    double score = 0.0;
    for (std::size_t p = 0; p < space.params.size(); ++p) {
      ParamValue v = sample_density(l_good[p], rng);
      score += log_pdf(l_good[p], v) - log_pdf(l_bad[p], v);
      candidate.assignments[param_name(space.params[p])] = std::move(v);
    }
    if (score > best_score) {
      best_score = score;
      out = std::move(candidate);
    }
  }
  return out;
}

OptimizerState observe(OptimizerState state, TrialResult result) {
  check_in_space(state.space, result.config);
  state.history.push_back(std::move(result));
  return state;
}

std::optional<TrialResult> best_trial(std::span<const TrialResult> history) {
  const TrialResult* best = nullptr;
  for (const TrialResult& t : history) {
    if (t.status != TrialStatus::Completed) continue;
    if (best == nullptr || t.objective > best->objective) best = &t;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

StudyResult run_study(const Objective& objective, OptimizerState state, std::size_t n_trials) {
  validate(state.space);
  for (std::size_t i = 0; i < n_trials; ++i) {
    TrialConfig config = suggest(state);
    TrialResult result;
    try {
      result = objective(config);
      result.config = config;
      if (result.status == TrialStatus::Failed || !std::isfinite(result.objective)) {
        result.status = TrialStatus::Failed;
        result.objective = 0.0;
      }
    } catch (const std::exception&) {
      result = TrialResult{config, 0.0, TrialStatus::Failed};
    }
    state = observe(std::move(state), std::move(result));
  }
  StudyResult out;
  out.best = best_trial(state.history);
  out.history = std::move(state.history);
  return out;
}

StudyResult run_study(const Objective& objective, const SearchSpace& space, std::size_t n_trials,
                      std::uint64_t seed, TpeOptions options) {
  return run_study(objective, OptimizerState{space, {}, seed, options}, n_trials);
}

SearchSpace default_slt_space() {
  std::vector<std::string> combos;
  for (OptAlgorithm a : kAllAlgorithms) combos.emplace_back(to_string(a));
  const std::size_t n = std::size(kAllAlgorithms);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      combos.push_back(std::string(to_string(kAllAlgorithms[i])) + "+" +
                       std::string(to_string(kAllAlgorithms[j])));
    }
  }
  const std::vector<std::string> boolean = {"true", "false"};
  return SearchSpace{{
      ContinuousParam{params::kTemperature, 0.0, 2.0},
      ContinuousParam{params::kRepetitionPenalty, 1.0, 2.0},
      CategoricalParam{params::kPromptOptEnabled, boolean},
      CategoricalParam{params::kPromptOptAlgorithms, std::move(combos)},
      CategoricalParam{params::kOptimizeSystemPrompt, boolean},
      CategoricalParam{params::kIncludeExamples, boolean},
  }};
}

void to_json(nlohmann::json& j, const TrialConfig& config) {
  j = nlohmann::json::object();
  for (const auto& [name, value] : config.assignments) {
    std::visit([&](const auto& v) { j[name] = v; }, value);
  }
}

void from_json(const nlohmann::json& j, TrialConfig& config) {
  config.assignments.clear();
  for (const auto& [name, value] : j.items()) {
    if (value.is_number()) {
      config.assignments[name] = value.get<double>();
    } else if (value.is_string()) {
      config.assignments[name] = value.get<std::string>();
    } else {
      throw ConfigError("trial config value for '" + name + "' is neither number nor string");
    }
  }
}

}  // namespace slt
