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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "slt/errors.hpp"
#include "slt/tpe.hpp"

using namespace slt;

namespace {

SearchSpace unit_temperature() { return SearchSpace{{ContinuousParam{"temperature", 0.0, 1.0}}}; }

TrialResult quadratic(const TrialConfig& c) {
  const double t = c.real("temperature");
  return TrialResult{c, -(t - 0.3) * (t - 0.3), TrialStatus::Completed};
}

// Uniform random search, written independently of the optimizer.
double random_search_best(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double best = -INFINITY;
  for (int i = 0; i < n; ++i) {
    const double t = u(rng);
    best = std::max(best, -(t - 0.3) * (t - 0.3));
  }
  return best;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SearchSpace random_space(std::mt19937_64& rng) {
  SearchSpace s;
  const int n = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) {
    if (rng() % 2) {
      const double lo = std::uniform_real_distribution<double>(-5, 5)(rng);
      const double width = std::uniform_real_distribution<double>(1e-6, 10)(rng);
      s.params.push_back(ContinuousParam{"c" + std::to_string(i), lo, lo + width});
    } else {
      CategoricalParam p{"k" + std::to_string(i), {}};
      const int m = 1 + static_cast<int>(rng() % 5);
      for (int j = 0; j < m; ++j) p.choices.push_back("v" + std::to_string(j));
      s.params.push_back(p);
    }
  }
  return s;
}

}  // namespace

TEST_SUITE("tpe") {
  TEST_CASE("default search space") {
    const SearchSpace s = default_slt_space();
    CHECK(s.params.size() == 6);
    const auto* temp = std::get_if<ContinuousParam>(s.find(params::kTemperature));
    REQUIRE(temp);
    CHECK(temp->lo == 0.0);
    CHECK(temp->hi == 2.0);
    const auto* rp = std::get_if<ContinuousParam>(s.find(params::kRepetitionPenalty));
    REQUIRE(rp);
    CHECK(rp->lo == 1.0);
    CHECK(rp->hi == 2.0);
    const auto* algos = std::get_if<CategoricalParam>(s.find(params::kPromptOptAlgorithms));
    REQUIRE(algos);
    CHECK(algos->choices.size() == 10);  // C(4,1) + C(4,2)
    for (const char* flag : {params::kPromptOptEnabled, params::kOptimizeSystemPrompt, params::kIncludeExamples}) {
      const auto* p = std::get_if<CategoricalParam>(s.find(flag));
      REQUIRE(p);
      CHECK(p->choices == std::vector<std::string>{"true", "false"});
    }
    CHECK_NOTHROW(validate(s));
  }

  TEST_CASE("space validation") {
    CHECK_THROWS_AS(validate(SearchSpace{}), ConfigError);
    CHECK_THROWS_AS(validate(SearchSpace{{ContinuousParam{"x", 1.0, 1.0}}}), ConfigError);
    CHECK_THROWS_AS(validate(SearchSpace{{CategoricalParam{"k", {}}}}), ConfigError);
    CHECK_THROWS_AS(validate(SearchSpace{{CategoricalParam{"k", {"a", "a"}}}}), ConfigError);
    CHECK_THROWS_AS(validate(SearchSpace{{ContinuousParam{"x", 0, 1}, ContinuousParam{"x", 0, 1}}}), ConfigError);
  }

  TEST_CASE("observe enforces bounds") {
    OptimizerState st{default_slt_space(), {}, 1, {}};
    TrialConfig c = suggest(st);
    c.assignments[params::kTemperature] = 3.0;
    CHECK_THROWS_AS(observe(st, TrialResult{c, 0.1, TrialStatus::Completed}), BoundsViolation);
    c = suggest(st);
    c.assignments[params::kIncludeExamples] = std::string("maybe");
    CHECK_THROWS_AS(observe(st, TrialResult{c, 0.1, TrialStatus::Completed}), BoundsViolation);
    c = suggest(st);
    c.assignments.erase(params::kTemperature);
    CHECK_THROWS_AS(observe(st, TrialResult{c, 0.1, TrialStatus::Completed}), BoundsViolation);
  }

  TEST_CASE("suggest is a pure function of the state") {
    OptimizerState st{unit_temperature(), {}, 42, {}};
    for (int i = 0; i < 15; ++i) {
      const TrialConfig a = suggest(st);
      CHECK(a == suggest(st));
      st = observe(st, quadratic(a));
    }
    OptimizerState replayed{unit_temperature(), {}, 42, {}};
    for (const TrialResult& t : st.history) replayed = observe(replayed, t);
    CHECK(replayed == st);
  }

  TEST_CASE("startup phase samples within bounds") {
    OptimizerState st{unit_temperature(), {}, 7, {}};
    for (int i = 0; i < 3; ++i) st = observe(st, quadratic(suggest(st)));
    const double t = suggest(st).real("temperature");
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }

  TEST_CASE("density ratio pulls toward the good region") {
    const SearchSpace space{{ContinuousParam{"temperature", 0.0, 2.0}}};
    std::vector<TrialResult> history;
    std::mt19937_64 rng(0);
    std::normal_distribution<double> jitter(0.0, 0.03);
    for (int i = 0; i < 10; ++i) {
      history.push_back({TrialConfig{{{"temperature", std::clamp(0.3 + jitter(rng), 0.0, 2.0)}}}, 1.0,
                         TrialStatus::Completed});
    }
    for (int i = 0; i < 30; ++i) {
      history.push_back({TrialConfig{{{"temperature", std::clamp(1.7 + jitter(rng), 0.0, 2.0)}}}, 0.0,
                         TrialStatus::Completed});
    }
    int closer = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const double t = suggest(OptimizerState{space, history, seed, {}}).real("temperature");
      closer += std::abs(t - 0.3) < std::abs(t - 1.7);
    }
    CHECK(closer >= 80);
  }

  TEST_CASE("run_study bookkeeping") {
    const auto constant = [](const TrialConfig& c) { return TrialResult{c, 1.0, TrialStatus::Completed}; };
    const StudyResult r = run_study(constant, default_slt_space(), 5, 1);
    REQUIRE(r.best);
    CHECK(r.best->objective == 1.0);
    CHECK(r.history.size() == 5);
    // Ties go to the earliest trial.
    CHECK(r.best->config == r.history[0].config);

    int calls = 0;
    const auto flaky = [&](const TrialConfig& c) -> TrialResult {
      if (++calls % 2) throw std::runtime_error("boom");
      return TrialResult{c, NAN, TrialStatus::Completed};
    };
    const StudyResult f = run_study(flaky, unit_temperature(), 4, 1);
    CHECK(!f.best);
    for (const TrialResult& t : f.history) {
      CHECK(t.status == TrialStatus::Failed);
      CHECK(t.objective == 0.0);
    }
  }

  TEST_CASE("property: suggestions stay inside random spaces") {
    std::mt19937_64 rng(2024);
    for (int iter = 0; iter < 60; ++iter) {
      const SearchSpace space = random_space(rng);
      OptimizerState st{space, {}, rng(), TpeOptions{0.25, 1 + rng() % 6, 1 + rng() % 30}};
      for (int i = 0; i < 25; ++i) {
        const TrialConfig c = suggest(st);
        REQUIRE_NOTHROW(check_in_space(space, c));
        const double obj = std::uniform_real_distribution<double>(-1, 1)(rng);
        st = observe(st, TrialResult{c, obj, rng() % 7 ? TrialStatus::Completed : TrialStatus::Failed});
      }
    }
  }

  TEST_CASE("property: seeded reproducibility and monotone best") {
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
      const StudyResult a = run_study(quadratic, unit_temperature(), 40, seed);
      const StudyResult b = run_study(quadratic, unit_temperature(), 40, seed);
      CHECK(a.history == b.history);
      CHECK(a.best == b.best);
      double best_so_far = -INFINITY;
      for (std::size_t i = 0; i < a.history.size(); ++i) {
        const auto prefix = best_trial(std::span(a.history).first(i + 1));
        REQUIRE(prefix);
        CHECK(prefix->objective >= best_so_far);
        best_so_far = prefix->objective;
      }
    }
    CHECK(run_study(quadratic, unit_temperature(), 20, 1).history !=
          run_study(quadratic, unit_temperature(), 20, 2).history);
  }

  TEST_CASE("beats uniform random on the shifted quadratic") {
    std::vector<double> tpe;
    std::vector<double> baseline;
    int close = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const StudyResult r = run_study(quadratic, unit_temperature(), 100, seed);
      REQUIRE(r.best);
      tpe.push_back(r.best->objective);
      close += std::abs(r.best->config.real("temperature") - 0.3) <= 0.05;
      baseline.push_back(random_search_best(seed, 100));
    }
    CHECK(close >= 18);
    CHECK(median(tpe) > median(baseline));
  }

  TEST_CASE("resuming from a prefix matches an uninterrupted study") {
    const StudyResult full = run_study(quadratic, unit_temperature(), 30, 5);
    OptimizerState st{unit_temperature(), {}, 5, {}};
    for (int i = 0; i < 12; ++i) st = observe(st, full.history[i]);
    const StudyResult resumed = run_study(quadratic, st, 18);
    CHECK(resumed.history == full.history);
  }

  TEST_CASE("trial config json") {
    TrialConfig c{{{"temperature", 0.25}, {"include_examples", std::string("true")}}};
    const nlohmann::json j = c;
    CHECK(j.at("temperature").is_number());
    CHECK(j.at("include_examples") == "true");
    CHECK(j.get<TrialConfig>() == c);
    CHECK(c.flag("include_examples"));
    CHECK_THROWS(c.real("include_examples"));
  }
}
