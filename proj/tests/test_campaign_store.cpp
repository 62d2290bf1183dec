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

#include <fstream>
#include <random>

#include "doctest.h"
#include "slt/campaign_store.hpp"
#include "slt/errors.hpp"
#include "slt/hash.hpp"
#include "slt/metrics.hpp"
#include "test_support.hpp"

using namespace slt;
namespace fs = std::filesystem;
using slt::testing::slurp;

namespace {

CampaignStore::Clock fixed_clock() {
  return [] { return std::int64_t{1700000000000}; };
}

TrialConfig config_with(double t) {
  return TrialConfig{{{"temperature", t}, {"include_examples", std::string("false")}}};
}

EvalRecord evaluated(const std::string& id, std::optional<double> ipc) {
  EvalRecord r;
  r.snippet_id = id;
  r.extraction = ipc ? ExtractionStatus::Fenced : ExtractionStatus::Refusal;
  r.compile_ok = ipc.has_value();
  if (ipc) r.outcome = SimOutcome{SimStatus::Ok, ipc, "system.cpu.ipc " + std::to_string(*ipc), 1.0, ""};
  r.failure = ipc ? FailureClass::None : FailureClass::Refusal;
  r.ipc = ipc;
  return r;
}

// Writes a synthetic campaign and returns the evaluations in log order.
std::vector<EvalRecord> write_campaign(CampaignStore& store, std::mt19937_64& rng, int trials) {
  std::vector<EvalRecord> live;
  for (int t = 0; t < trials; ++t) {
    const auto id = static_cast<std::uint64_t>(t);
    store.append(TrialStarted{id, config_with(std::uniform_real_distribution<double>(0, 2)(rng))});
    std::vector<std::string> ids;
    const int snippets = 1 + static_cast<int>(rng() % 4);
    for (int s = 0; s < snippets; ++s) {
      const std::string sid = store.put_blob("int main(){return " + std::to_string(rng() % 5) + ";}");
      store.append(SnippetGenerated{id, sid, "abcd", FinishReason::Stop, ExtractionStatus::Fenced});
      ids.push_back(sid);
    }
    double best = 0.0;
    for (const std::string& sid : ids) {
      std::optional<double> ipc;
      if (rng() % 3) ipc = std::uniform_real_distribution<double>(0, 3)(rng);
      const EvalRecord r = evaluated(sid, ipc);
      store.append(SnippetEvaluated{r});
      live.push_back(r);
      best = std::max(best, ipc.value_or(0.0));
    }
    store.append(TrialCompleted{id, best, TrialStatus::Completed});
  }
  return live;
}

}  // namespace

TEST_SUITE("campaign_store") {
  TEST_CASE("sequence numbers and ordering rules") {
    TempDir dir;
    CampaignStore store(dir.path(), fixed_clock());
    CHECK(store.append(TrialStarted{0, config_with(0.5)}) == 1);
    CHECK_THROWS_AS(store.append(SnippetEvaluated{evaluated("feedbeef", 0.1)}), OrderingViolation);
    CHECK_THROWS_AS(store.append(TrialCompleted{9, 0.0, TrialStatus::Completed}), OrderingViolation);
    CHECK_THROWS_AS(store.append(TrialStarted{0, config_with(0.5)}), OrderingViolation);
    CHECK(store.append(TrialCompleted{0, 0.0, TrialStatus::Failed}) == 2);
    CHECK_THROWS_AS(store.append(TrialCompleted{0, 0.0, TrialStatus::Failed}), OrderingViolation);
    CHECK(store.last_seq() == 2);
  }

  TEST_CASE("content-addressed blobs") {
    TempDir dir;
    CampaignStore store(dir.path(), fixed_clock());
    const std::string a = store.put_blob("int main(){return 0;}");
    const std::string b = store.put_blob("int main(){return 0;}");
    CHECK(a == b);
    CHECK(a == content_id("int main(){return 0;}"));
    CHECK(a.size() == 16);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path() / "blobs")) ++files;
    CHECK(files == 1);
    store.append(SnippetGenerated{std::nullopt, a, "p", FinishReason::Stop, ExtractionStatus::Fenced});
    store.append(SnippetGenerated{std::nullopt, b, "p", FinishReason::Stop, ExtractionStatus::Fenced});
    CHECK(store.read_blob(a) == "int main(){return 0;}");
    CHECK(store.blob_path(a).extension() == ".c");
    CHECK_THROWS_AS(store.read_blob("0000000000000000"), IoError);
  }

  TEST_CASE("record encoding round trip") {
    const std::vector<LogPayload> payloads = {
        TrialStarted{3, config_with(1.25)},
        SnippetGenerated{3, "0123456789abcdef", "fedcba9876543210", FinishReason::Length,
                         ExtractionStatus::Unterminated},
        SnippetGenerated{std::nullopt, "0123456789abcdef", "fedcba9876543210", FinishReason::Error,
                         ExtractionStatus::Empty},
        SnippetEvaluated{evaluated("0123456789abcdef", 0.799607)},
        SnippetEvaluated{evaluated("0123456789abcdef", std::nullopt)},
        TrialCompleted{3, 0.799607, TrialStatus::Completed}};
    std::uint64_t seq = 10;
    for (const LogPayload& p : payloads) {
      const LogRecord rec{seq++, 1700000000123, p};
      const std::string line = encode_record(rec);
      CHECK(line.find('\n') == std::string::npos);
      CHECK(line.rfind("{\"seq\":", 0) == 0);
      CHECK(decode_record(line) == rec);
    }
    CHECK_THROWS(decode_record(R"({"seq":1,"ts":0,"kind":"mystery"})"));
  }

  TEST_CASE("replay of three trials") {
    TempDir dir;
    {
      CampaignStore store(dir.path(), fixed_clock());
      for (std::uint64_t t = 0; t < 3; ++t) {
        store.append(TrialStarted{t, config_with(0.1 * static_cast<double>(t))});
        store.append(TrialCompleted{t, 0.5 + static_cast<double>(t), TrialStatus::Completed});
      }
    }
    const Replay r = replay(dir.path());
    REQUIRE(r.trials.size() == 3);
    CHECK(r.trials[2].objective == 2.5);
    CHECK(r.trials[1].config == config_with(0.1));
    CHECK(r.trial_ids == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(r.next_trial_id == 3);
  }

  TEST_CASE("empty and missing logs") {
    TempDir dir;
    CHECK(read_log(dir.path() / "campaign.jsonl").empty());
    std::ofstream(dir.path() / "campaign.jsonl").close();
    const Replay r = replay(dir.path());
    CHECK(r.trials.empty());
    CHECK(r.evaluations.empty());
  }

  TEST_CASE("integrity scan") {
    TempDir dir;
    {
      CampaignStore store(dir.path(), fixed_clock());
      store.append(TrialStarted{0, config_with(0.5)});
      store.append(TrialCompleted{0, 0.1, TrialStatus::Completed});
      store.append(TrialStarted{1, config_with(0.7)});
    }
    const fs::path log = dir.path() / "campaign.jsonl";
    const std::string text = slurp(log);

    SUBCASE("truncated last line") {
      std::ofstream(log, std::ios::trunc) << text.substr(0, text.size() - 5);
      try {
        read_log(log);
        FAIL("expected CorruptLog");
      } catch (const CorruptLog& e) {
        CHECK(e.seq() == 3);
      }
      CHECK_THROWS_AS(CampaignStore(dir.path()), CorruptLog);
    }
    SUBCASE("non-increasing sequence") {
      const std::size_t second = text.find('\n') + 1;
      std::ofstream(log, std::ios::trunc) << text << text.substr(second);
      try {
        read_log(log);
        FAIL("expected CorruptLog");
      } catch (const CorruptLog& e) {
        CHECK(e.seq() == 2);
      }
    }
    SUBCASE("garbage line") {
      std::ofstream(log, std::ios::trunc) << text << "{not json}\n";
      try {
        read_log(log);
        FAIL("expected CorruptLog");
      } catch (const CorruptLog& e) {
        CHECK(e.seq() == 4);
      }
    }
  }

  TEST_CASE("reopening continues the sequence") {
    TempDir dir;
    {
      CampaignStore store(dir.path(), fixed_clock());
      store.append(TrialStarted{0, config_with(0.5)});
    }
    CampaignStore store(dir.path(), fixed_clock());
    CHECK(store.last_seq() == 1);
    CHECK_THROWS_AS(store.append(TrialStarted{0, config_with(0.5)}), OrderingViolation);
    CHECK(store.append(TrialCompleted{0, 0.0, TrialStatus::Completed}) == 2);
  }

  TEST_CASE("pending snippets") {
    TempDir dir;
    CampaignStore store(dir.path(), fixed_clock());
    const std::string a = store.put_blob("a");
    const std::string b = store.put_blob("b");
    store.append(SnippetGenerated{std::nullopt, a, "p", FinishReason::Stop, ExtractionStatus::Fenced});
    store.append(SnippetGenerated{std::nullopt, b, "p", FinishReason::Stop, ExtractionStatus::Fenced});
    store.append(SnippetGenerated{std::nullopt, a, "p", FinishReason::Stop, ExtractionStatus::Fenced});
    store.append(SnippetEvaluated{evaluated(a, 0.2)});
    const auto pending = pending_snippets(read_log(store.log_path()));
    REQUIRE(pending.size() == 2);
    CHECK(pending[0].snippet_id == b);
    CHECK(pending[1].snippet_id == a);
  }

  TEST_CASE("property: replayed stats equal live stats") {
    std::mt19937_64 rng(31337);
    for (int iter = 0; iter < 25; ++iter) {
      TempDir dir;
      std::vector<EvalRecord> live;
      {
        CampaignStore store(dir.path(), fixed_clock());
        live = write_campaign(store, rng, 1 + static_cast<int>(rng() % 8));
      }
      const Replay r = replay(dir.path());
      REQUIRE(r.evaluations == live);
      const double threshold = std::uniform_real_distribution<double>(0, 3)(rng);
      REQUIRE(campaign_stats(r.evaluations, threshold) == campaign_stats(live, threshold));
    }
  }

  TEST_CASE("property: truncation at any record boundary replays cleanly") {
    std::mt19937_64 rng(4);
    TempDir dir;
    {
      CampaignStore store(dir.path(), fixed_clock());
      write_campaign(store, rng, 6);
    }
    const std::string text = slurp(dir.path() / "campaign.jsonl");
    const auto full = read_log(dir.path() / "campaign.jsonl");
    std::size_t records = 0;
    for (std::size_t pos = 0; pos <= text.size(); pos = text.find('\n', pos) + 1) {
      TempDir cut;
      std::ofstream(cut.path() / "campaign.jsonl", std::ios::binary) << text.substr(0, pos);
      const auto prefix = read_log(cut.path() / "campaign.jsonl");
      REQUIRE(prefix.size() == records);
      REQUIRE(std::equal(prefix.begin(), prefix.end(), full.begin()));
      REQUIRE_NOTHROW(replay(prefix));
      if (pos == text.size()) break;
      ++records;
    }
    CHECK(records == full.size());
  }
}
