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

#include <bit>
#include <cmath>
#include <random>

#include "doctest.h"
#include "slt/errors.hpp"
#include "slt/metrics.hpp"

using namespace slt;

namespace {

// Fraction of k-subsets of n samples (the first c passing) holding a pass,
// by enumerating every subset.
double brute_force_pass_at_k(unsigned n, unsigned c, unsigned k) {
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  const std::uint32_t passing = (1u << c) - 1u;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<unsigned>(std::popcount(mask)) != k) continue;
    ++total;
    hits += (mask & passing) != 0;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

EvalRecord passing(double ipc) {
  EvalRecord r;
  r.extraction = ExtractionStatus::Fenced;
  r.compile_ok = true;
  r.outcome = SimOutcome{SimStatus::Ok, ipc, std::nullopt, 0.0, ""};
  r.failure = FailureClass::None;
  r.ipc = ipc;
  return r;
}

EvalRecord failing(FailureClass f) {
  EvalRecord r;
  r.failure = f;
  return r;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("published pass@k values") {
    CHECK(pass_at_k({5000, 3998}, 1) == doctest::Approx(0.7996).epsilon(1e-12));
    CHECK(std::abs(pass_at_k({5000, 3998}, 5) - 0.9997) <= 1e-4);
    CHECK(pass_at_k({5000, 3537}, 1) == doctest::Approx(0.7074).epsilon(1e-12));
    CHECK(std::abs(pass_at_k({5000, 3537}, 5) - 0.9979) <= 1e-4);
    // Percentage-point gaps between the two pass definitions.
    const double gap1 = 100.0 * (pass_at_k({5000, 3998}, 1) - pass_at_k({5000, 3537}, 1));
    const double gap5 = 100.0 * (pass_at_k({5000, 3998}, 5) - pass_at_k({5000, 3537}, 5));
    CHECK(std::round(gap1 * 100.0) / 100.0 == doctest::Approx(9.22));
    CHECK(std::round(gap5 * 100.0) / 100.0 == doctest::Approx(0.18));
  }

  TEST_CASE("degenerate counts and domain errors") {
    for (std::size_t k = 1; k <= 7; ++k) {
      CHECK(pass_at_k({7, 7}, k) == 1.0);
      CHECK(pass_at_k({7, 0}, k) == 0.0);
    }
    CHECK_THROWS_AS(pass_at_k({5, 1}, 0), DomainError);
    CHECK_THROWS_AS(pass_at_k({5, 1}, 6), DomainError);
    CHECK_THROWS_AS(pass_at_k({5, 6}, 1), DomainError);
    CHECK_THROWS_AS(pass_at_k({0, 0}, 1), DomainError);
  }

  TEST_CASE("oracle: exhaustive subset enumeration for n <= 12") {
    double worst = 0.0;
    for (unsigned n = 1; n <= 12; ++n) {
      for (unsigned c = 0; c <= n; ++c) {
        for (unsigned k = 1; k <= n; ++k) {
          worst = std::max(worst, std::abs(pass_at_k({n, c}, k) - brute_force_pass_at_k(n, c, k)));
        }
      }
    }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("property: pass@1, monotonicity, saturation") {
    std::mt19937_64 rng(8);
    for (int iter = 0; iter < 2000; ++iter) {
      const std::size_t n = 1 + rng() % 400;
      const std::size_t c = rng() % (n + 1);
      REQUIRE(pass_at_k({n, c}, 1) == doctest::Approx(static_cast<double>(c) / n).epsilon(1e-14));
      const std::size_t k = 1 + rng() % n;
      const double p = pass_at_k({n, c}, k);
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0);
      if (k < n) REQUIRE(pass_at_k({n, c}, k + 1) >= p);
      if (c < n) REQUIRE(pass_at_k({n, c + 1}, k) >= p);
      if (c >= 1) REQUIRE(pass_at_k({n, c}, n) == 1.0);
    }
  }

  TEST_CASE("campaign stats") {
    std::vector<EvalRecord> records;
    records.push_back(passing(0.3));
    CampaignStats s = campaign_stats(records, 0.5);
    CHECK(s.n == 1);
    CHECK(s.c_valid == 1);
    CHECK(s.c_ipc == 0);
    CHECK(!s.pass_at.contains({PassDefinition::Valid, 5}));

    records.push_back(passing(0.799607));
    records.push_back(passing(0.5));
    records.push_back(failing(FailureClass::CompileError));
    records.push_back(failing(FailureClass::CompileError));
    records.push_back(failing(FailureClass::Refusal));
    s = campaign_stats(records, 0.5);
    CHECK(s.best_ipc == 0.799607);
    CHECK(s.c_valid == 3);
    CHECK(s.c_ipc == 2);
    CHECK(s.failure_histogram.at(FailureClass::CompileError) == 2);
    CHECK(s.failure_histogram.at(FailureClass::Refusal) == 1);
    CHECK(!s.failure_histogram.contains(FailureClass::None));
    CHECK(s.pass_at.at({PassDefinition::Valid, 5}) == pass_at_k({6, 3}, 5));
    CHECK(stats_from_json(to_json(s)) == s);
    CHECK(format_report(s).find("0.799607") != std::string::npos);
    CHECK_THROWS_AS(campaign_stats({}), DomainError);
  }

  TEST_CASE("the published campaign shape") {
    std::vector<EvalRecord> records;
    for (int i = 0; i < 3537; ++i) records.push_back(passing(0.6));
    for (int i = 0; i < 461; ++i) records.push_back(passing(0.2));
    for (int i = 0; i < 1002; ++i) records.push_back(failing(FailureClass::CompileError));
    records[17] = passing(0.799607);
    const CampaignStats s = campaign_stats(records, 0.5);
    CHECK(s.c_valid == 3998);
    CHECK(s.c_ipc == 3537);
    CHECK(s.best_ipc == 0.799607);
    const std::string report = format_report(s);
    CHECK(report.find("79.96%") != std::string::npos);
    CHECK(report.find("70.74%") != std::string::npos);
    CHECK(report.find("99.97%") != std::string::npos);
    CHECK(report.find("99.79%") != std::string::npos);
    CHECK(report.find("0.799607") != std::string::npos);
  }

  TEST_CASE("property: thresholded pass@k never exceeds validity pass@k") {
    std::mt19937_64 rng(21);
    for (int iter = 0; iter < 200; ++iter) {
      std::vector<EvalRecord> records;
      const int n = 1 + static_cast<int>(rng() % 40);
      for (int i = 0; i < n; ++i) {
        if (rng() % 3 == 0) {
          records.push_back(failing(kAllFailureClasses[rng() % 6]));
        } else {
          records.push_back(passing(std::uniform_real_distribution<double>(0.0, 3.0)(rng)));
        }
      }
      const CampaignStats s = campaign_stats(records, 1.0);
      for (const auto& [key, p] : s.pass_at) {
        if (key.first == PassDefinition::IpcThreshold) REQUIRE(p <= s.pass_at.at({PassDefinition::Valid, key.second}));
      }
    }
  }
}
