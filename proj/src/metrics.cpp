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

#include "slt/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "slt/errors.hpp"

namespace slt {

double pass_at_k(PassCounts counts, std::size_t k) {
  if (k < 1 || k > counts.n) {
    throw DomainError("pass@k needs 1 <= k <= n (k=" + std::to_string(k) +
                      ", n=" + std::to_string(counts.n) + ")");
  }
  if (counts.c > counts.n) throw DomainError("pass count exceeds sample count");
  const std::size_t fails = counts.n - counts.c;
  if (fails < k) return 1.0;
  double all_fail = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    all_fail *= static_cast<double>(fails - i) / static_cast<double>(counts.n - i);
  }
  return 1.0 - all_fail;
}

std::string_view to_string(PassDefinition def) {
  return def == PassDefinition::Valid ? "valid" : "ipc";
}

CampaignStats campaign_stats(std::span<const EvalRecord> records, double threshold) {
  if (records.empty()) throw DomainError("campaign_stats needs at least one record");
  CampaignStats s;
  s.n = records.size();
  s.threshold = threshold;
  for (const EvalRecord& r : records) {
    if (r.failure != FailureClass::None) {
      ++s.failure_histogram[r.failure];
      continue;
    }
    ++s.c_valid;
    if (r.ipc) {
      if (*r.ipc >= threshold) ++s.c_ipc;
      if (!s.best_ipc || *r.ipc > *s.best_ipc) s.best_ipc = *r.ipc;
    }
  }
  for (std::size_t k : kReportedK) {
    if (k > s.n) continue;
    s.pass_at[{PassDefinition::Valid, k}] = pass_at_k({s.n, s.c_valid}, k);
    s.pass_at[{PassDefinition::IpcThreshold, k}] = pass_at_k({s.n, s.c_ipc}, k);
  }
  return s;
}

nlohmann::json to_json(const CampaignStats& stats) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [cls, count] : stats.failure_histogram) hist[std::string(to_string(cls))] = count;
  nlohmann::json pass = nlohmann::json::object();
  for (const auto& [key, value] : stats.pass_at) {
    pass[std::string(to_string(key.first))]["pass@" + std::to_string(key.second)] = value;
  }
  return nlohmann::json{
      {"n", stats.n},
      {"c_valid", stats.c_valid},
      {"c_ipc", stats.c_ipc},
      {"threshold", stats.threshold},
      {"best_ipc", stats.best_ipc ? nlohmann::json(*stats.best_ipc) : nlohmann::json(nullptr)},
      {"failure_histogram", std::move(hist)},
      {"pass_at", std::move(pass)},
  };
}

CampaignStats stats_from_json(const nlohmann::json& j) {
  CampaignStats s;
  s.n = j.at("n").get<std::size_t>();
  s.c_valid = j.at("c_valid").get<std::size_t>();
  s.c_ipc = j.at("c_ipc").get<std::size_t>();
  s.threshold = j.at("threshold").get<double>();
  if (!j.at("best_ipc").is_null()) s.best_ipc = j.at("best_ipc").get<double>();
  for (const auto& [name, count] : j.at("failure_histogram").items()) {
    s.failure_histogram[parse_failure_class(name)] = count.get<std::size_t>();
  }
  for (const auto& [def_name, ks] : j.at("pass_at").items()) {
    const PassDefinition def = def_name == "valid" ? PassDefinition::Valid : PassDefinition::IpcThreshold;
    for (const auto& [label, value] : ks.items()) {
      s.pass_at[{def, std::stoul(label.substr(5))}] = value.get<double>();
    }
  }
  return s;
}

std::string format_report(const CampaignStats& stats) {
  std::ostringstream out;
  char buf[128];
  out << "snippets (n)            " << stats.n << '\n';
  out << "valid (c_valid)         " << stats.c_valid << '\n';
  std::snprintf(buf, sizeof buf, "ipc >= %-6g (c_ipc)    ", stats.threshold);
  out << buf << stats.c_ipc << '\n';
  if (stats.best_ipc) {
    std::snprintf(buf, sizeof buf, "%.6f", *stats.best_ipc);
    out << "best ipc                " << buf << '\n';
  } else {
    out << "best ipc                -\n";
  }
  out << "failures\n";
  for (FailureClass cls : kAllFailureClasses) {
    if (cls == FailureClass::None) continue;
    const auto it = stats.failure_histogram.find(cls);
    std::snprintf(buf, sizeof buf, "  %-22s%zu\n", std::string(to_string(cls)).c_str(),
                  it == stats.failure_histogram.end() ? std::size_t{0} : it->second);
    out << buf;
  }
  out << "pass@k                  valid      ipc\n";
  for (std::size_t k : kReportedK) {
    const auto v = stats.pass_at.find({PassDefinition::Valid, k});
    const auto t = stats.pass_at.find({PassDefinition::IpcThreshold, k});
    if (v == stats.pass_at.end()) continue;
    std::snprintf(buf, sizeof buf, "  pass@%-18zu%6.2f%%   %6.2f%%\n", k, 100.0 * v->second,
                  100.0 * t->second);
    out << buf;
  }
  return out.str();
}

}  // namespace slt
