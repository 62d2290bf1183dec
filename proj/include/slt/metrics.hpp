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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "json.hpp"
#include "slt/eval_harness.hpp"

namespace slt {

struct PassCounts {
  std::size_t n = 0;  // generated
  std::size_t c = 0;  // passing
};

/// Unbiased pass@k estimate 1 - C(n-c, k) / C(n, k), evaluated as the product
/// 1 - prod_{i<k} (n-c-i)/(n-i). Throws DomainError unless 1 <= k <= n and c <= n.
double pass_at_k(PassCounts counts, std::size_t k);

// "valid": compiles and runs without crash or timeout.
// "ipc": valid and ipc >= threshold.
enum class PassDefinition { Valid, IpcThreshold };

std::string_view to_string(PassDefinition def);

inline constexpr std::size_t kReportedK[] = {1, 5};
inline constexpr double kDefaultIpcThreshold = 0.5;

struct CampaignStats {
  std::size_t n = 0;
  std::size_t c_valid = 0;
  std::size_t c_ipc = 0;
  double threshold = kDefaultIpcThreshold;
  std::optional<double> best_ipc;
  std::map<FailureClass, std::size_t> failure_histogram;  // non-None classes only
  std::map<std::pair<PassDefinition, std::size_t>, double> pass_at;

  bool operator==(const CampaignStats&) const = default;
};

/// Aggregates evaluation records. k values above n are left out of pass_at.
/// Throws DomainError on an empty record list.
CampaignStats campaign_stats(std::span<const EvalRecord> records,
                             double threshold = kDefaultIpcThreshold);

/// Machine-readable report; probabilities at full precision.
nlohmann::json to_json(const CampaignStats& stats);
CampaignStats stats_from_json(const nlohmann::json& j);

/// Human-readable table; probabilities as percentages with two decimals.
std::string format_report(const CampaignStats& stats);

}  // namespace slt
