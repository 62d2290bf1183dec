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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slt/eval_harness.hpp"
#include "slt/llm_gateway.hpp"
#include "slt/snippet_extractor.hpp"
#include "slt/tpe.hpp"

namespace slt {

struct TrialStarted {
  std::uint64_t trial_id = 0;
  TrialConfig config;
  bool operator==(const TrialStarted&) const = default;
};

struct SnippetGenerated {
  std::optional<std::uint64_t> trial_id;  // absent for stand-alone `generate` runs
  std::string snippet_id;
  std::string prompt_hash;
  FinishReason finish_reason = FinishReason::Stop;
  ExtractionStatus extraction = ExtractionStatus::Empty;
  bool operator==(const SnippetGenerated&) const = default;
};

struct SnippetEvaluated {
  EvalRecord record;  // record.snippet_id names the generated snippet
  bool operator==(const SnippetEvaluated&) const = default;
};

struct TrialCompleted {
  std::uint64_t trial_id = 0;
  double objective = 0.0;
  TrialStatus status = TrialStatus::Completed;
  bool operator==(const TrialCompleted&) const = default;
};

using LogPayload = std::variant<TrialStarted, SnippetGenerated, SnippetEvaluated, TrialCompleted>;

struct LogRecord {
  std::uint64_t seq = 0;
  std::int64_t ts_ms = 0;  // UTC milliseconds
  LogPayload payload;
  bool operator==(const LogRecord&) const = default;
};

std::string_view kind_name(const LogPayload& payload);

/// One JSONL line, without the trailing newline.
std::string encode_record(const LogRecord& record);
LogRecord decode_record(std::string_view line);  // throws nlohmann/ConfigError on bad input

inline constexpr std::string_view kLogFileName = "campaign.jsonl";
inline constexpr std::string_view kBlobDirName = "blobs";

/// Accepts either a campaign directory or the path of its log file.
std::filesystem::path resolve_log_path(const std::filesystem::path& path);

/// Parses and integrity-checks a whole log. Throws CorruptLog naming the
/// first bad sequence number (a truncated final line is reported as the seq
/// it would have carried).
std::vector<LogRecord> read_log(const std::filesystem::path& log_path);

// Append-only campaign log plus content-addressed snippet blobs.
class CampaignStore {
 public:
  using Clock = std::function<std::int64_t()>;

  static std::int64_t utc_now_ms();

  /// Creates the directory layout if needed. An existing log is scanned so
  /// appends continue its sequence; a corrupt log throws CorruptLog.
  explicit CampaignStore(std::filesystem::path dir, Clock clock = &CampaignStore::utc_now_ms);
  ~CampaignStore();

  CampaignStore(const CampaignStore&) = delete;
  CampaignStore& operator=(const CampaignStore&) = delete;

  /// Validates references, writes one line and syncs it. Returns the new seq.
  /// Throws OrderingViolation or IoError.
  std::uint64_t append(const LogPayload& payload);

  /// Stores `text` under its content hash (once) and returns the hash.
  std::string put_blob(std::string_view text);
  std::string read_blob(std::string_view id) const;
  bool has_blob(std::string_view id) const;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path log_path() const { return dir_ / kLogFileName; }
  std::filesystem::path blob_path(std::string_view id) const;
  std::uint64_t last_seq() const;

 private:
  void check_and_track(const LogPayload& payload);

  std::filesystem::path dir_;
  Clock clock_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::uint64_t last_seq_ = 0;
  std::set<std::string> snippets_;
  std::set<std::uint64_t> started_;
  std::set<std::uint64_t> completed_;
};

struct Replay {
  std::vector<TrialResult> trials;       // completed trials, in completion order
  std::vector<std::uint64_t> trial_ids;  // parallel to `trials`
  std::vector<EvalRecord> evaluations;
  std::uint64_t next_trial_id = 0;       // one past the largest started trial id
};

Replay replay(const std::vector<LogRecord>& log);
Replay replay(const std::filesystem::path& path);

/// Generated snippets that have no matching evaluation yet, in log order.
std::vector<SnippetGenerated> pending_snippets(const std::vector<LogRecord>& log);

}  // namespace slt
