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

#include "slt/campaign_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <map>

#include "slt/errors.hpp"
#include "slt/hash.hpp"

namespace slt {
namespace fs = std::filesystem;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void write_all(int fd, std::string_view data, const fs::path& where) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("write " + where.string() + ": " + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

std::string_view kind_name(const LogPayload& payload) {
  return std::visit(overloaded{[](const TrialStarted&) { return std::string_view("trial_started"); },
                               [](const SnippetGenerated&) { return std::string_view("snippet_generated"); },
                               [](const SnippetEvaluated&) { return std::string_view("snippet_evaluated"); },
                               [](const TrialCompleted&) { return std::string_view("trial_completed"); }},
                    payload);
}

std::string encode_record(const LogRecord& record) {
  nlohmann::ordered_json j;
  j["seq"] = record.seq;
  j["ts"] = record.ts_ms;
  j["kind"] = kind_name(record.payload);
  std::visit(overloaded{[&](const TrialStarted& r) {
                          j["trial_id"] = r.trial_id;
                          j["config"] = nlohmann::json(r.config);
                        },
                        [&](const SnippetGenerated& r) {
                          j["trial_id"] = r.trial_id ? nlohmann::json(*r.trial_id) : nlohmann::json(nullptr);
                          j["snippet_id"] = r.snippet_id;
                          j["prompt_hash"] = r.prompt_hash;
                          j["finish_reason"] = to_string(r.finish_reason);
                          j["extraction"] = to_string(r.extraction);
                        },
                        [&](const SnippetEvaluated& r) {
                          j["snippet_id"] = r.record.snippet_id;
                          j["record"] = nlohmann::json(r.record);
                        },
                        [&](const TrialCompleted& r) {
                          j["trial_id"] = r.trial_id;
                          j["objective"] = r.objective;
                          j["status"] = to_string(r.status);
                        }},
             record.payload);
  return j.dump();
}

LogRecord decode_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  LogRecord rec;
  rec.seq = j.at("seq").get<std::uint64_t>();
  rec.ts_ms = j.at("ts").get<std::int64_t>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "trial_started") {
    rec.payload = TrialStarted{j.at("trial_id").get<std::uint64_t>(), j.at("config").get<TrialConfig>()};
  } else if (kind == "snippet_generated") {
    SnippetGenerated g;
    if (!j.at("trial_id").is_null()) g.trial_id = j.at("trial_id").get<std::uint64_t>();
    g.snippet_id = j.at("snippet_id").get<std::string>();
    g.prompt_hash = j.at("prompt_hash").get<std::string>();
    g.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
    g.extraction = parse_extraction_status(j.at("extraction").get<std::string>());
    rec.payload = std::move(g);
  } else if (kind == "snippet_evaluated") {
    SnippetEvaluated e{j.at("record").get<EvalRecord>()};
    if (e.record.snippet_id != j.at("snippet_id").get<std::string>()) {
      throw ConfigError("snippet_evaluated ids disagree");
    }
    rec.payload = std::move(e);
  } else if (kind == "trial_completed") {
    rec.payload = TrialCompleted{j.at("trial_id").get<std::uint64_t>(), j.at("objective").get<double>(),
                                 parse_trial_status(j.at("status").get<std::string>())};
  } else {
    throw ConfigError("unknown record kind '" + kind + "'");
  }
  return rec;
}

fs::path resolve_log_path(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) return path / kLogFileName;
  return path;
}

namespace {

// Reference bookkeeping shared by the writer and the reader.
struct RefTracker {
  std::set<std::string> snippets;
  std::set<std::uint64_t> started;
  std::set<std::uint64_t> completed;

  // Returns an error message, or empty if the payload is acceptable.
  std::string check(const LogPayload& payload) const {
    return std::visit(
        overloaded{[&](const TrialStarted& r) -> std::string {
                     return started.contains(r.trial_id)
                                ? "trial " + std::to_string(r.trial_id) + " started twice"
                                : "";
                   },
                   [&](const SnippetGenerated& r) -> std::string {
                     if (r.snippet_id.empty()) return "snippet_generated without snippet_id";
                     return "";
                   },
                   [&](const SnippetEvaluated& r) -> std::string {
                     return snippets.contains(r.record.snippet_id)
                                ? ""
                                : "snippet " + r.record.snippet_id + " evaluated before generation";
                   },
                   [&](const TrialCompleted& r) -> std::string {
                     if (!started.contains(r.trial_id)) {
                       return "trial " + std::to_string(r.trial_id) + " completed before start";
                     }
                     if (completed.contains(r.trial_id)) {
                       return "trial " + std::to_string(r.trial_id) + " completed twice";
                     }
                     return "";
                   }},
        payload);
  }

  void track(const LogPayload& payload) {
    std::visit(overloaded{[&](const TrialStarted& r) { started.insert(r.trial_id); },
                          [&](const SnippetGenerated& r) { snippets.insert(r.snippet_id); },
                          [](const SnippetEvaluated&) {},
                          [&](const TrialCompleted& r) { completed.insert(r.trial_id); }},
               payload);
  }
};

}  // namespace

std::vector<LogRecord> read_log(const fs::path& log_path) {
  std::vector<LogRecord> out;
  std::ifstream in(log_path, std::ios::binary);
  if (!in) {
    std::error_code ec;
    if (!fs::exists(log_path, ec)) return out;
    throw IoError("cannot read " + log_path.string());
  }
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  RefTracker refs;
  std::uint64_t last = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) throw CorruptLog(last + 1, "truncated final record");
    const std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    LogRecord rec;
    try {
      rec = decode_record(line);
    } catch (const std::exception& e) {
      throw CorruptLog(last + 1, std::string("unreadable record: ") + e.what());
    }
    if (rec.seq <= last) throw CorruptLog(rec.seq, "sequence number does not increase");
    if (const std::string err = refs.check(rec.payload); !err.empty()) throw CorruptLog(rec.seq, err);
    refs.track(rec.payload);
    last = rec.seq;
    out.push_back(std::move(rec));
  }
  return out;
}

std::int64_t CampaignStore::utc_now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

CampaignStore::CampaignStore(fs::path dir, Clock clock) : dir_(std::move(dir)), clock_(std::move(clock)) {
  std::error_code ec;
  fs::create_directories(dir_ / kBlobDirName, ec);
  if (ec) throw IoError("cannot create " + (dir_ / kBlobDirName).string() + ": " + ec.message());
  RefTracker refs;
  for (const LogRecord& rec : read_log(log_path())) {
    refs.track(rec.payload);
    last_seq_ = rec.seq;
  }
  snippets_ = std::move(refs.snippets);
  started_ = std::move(refs.started);
  completed_ = std::move(refs.completed);
  fd_ = ::open(log_path().c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open " + log_path().string() + ": " + std::strerror(errno));
}

CampaignStore::~CampaignStore() {
  if (fd_ >= 0) ::close(fd_);
}

void CampaignStore::check_and_track(const LogPayload& payload) {
  RefTracker refs{snippets_, started_, completed_};
  if (const std::string err = refs.check(payload); !err.empty()) throw OrderingViolation(err);
  std::visit(overloaded{[&](const TrialStarted& r) { started_.insert(r.trial_id); },
                        [&](const SnippetGenerated& r) { snippets_.insert(r.snippet_id); },
                        [](const SnippetEvaluated&) {},
                        [&](const TrialCompleted& r) { completed_.insert(r.trial_id); }},
             payload);
}

std::uint64_t CampaignStore::append(const LogPayload& payload) {
  std::lock_guard lock(mu_);
  check_and_track(payload);
  LogRecord rec{last_seq_ + 1, clock_(), payload};
  std::string line = encode_record(rec);
  line += '\n';
  write_all(fd_, line, log_path());
  if (::fdatasync(fd_) != 0) throw IoError("fdatasync " + log_path().string() + ": " + std::strerror(errno));
  last_seq_ = rec.seq;
  return rec.seq;
}

std::uint64_t CampaignStore::last_seq() const {
  std::lock_guard lock(mu_);
  return last_seq_;
}

fs::path CampaignStore::blob_path(std::string_view id) const {
  return dir_ / kBlobDirName / (std::string(id) + ".c");
}

bool CampaignStore::has_blob(std::string_view id) const {
  std::error_code ec;
  return fs::exists(blob_path(id), ec);
}

std::string CampaignStore::put_blob(std::string_view text) {
  const std::string id = content_id(text);
  std::lock_guard lock(mu_);
  const fs::path target = blob_path(id);
  std::error_code ec;
  if (fs::exists(target, ec)) return id;
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("cannot write blob " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot store blob " + target.string() + ": " + ec.message());
  return id;
}

std::string CampaignStore::read_blob(std::string_view id) const {
  std::ifstream in(blob_path(id), std::ios::binary);
  if (!in) throw IoError("missing blob " + std::string(id));
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Replay replay(const std::vector<LogRecord>& log) {
  Replay out;
  std::map<std::uint64_t, TrialConfig> configs;
  bool any_trial = false;
  for (const LogRecord& rec : log) {
    std::visit(overloaded{[&](const TrialStarted& r) {
                            configs[r.trial_id] = r.config;
                            out.next_trial_id = any_trial ? std::max(out.next_trial_id, r.trial_id + 1)
                                                          : r.trial_id + 1;
                            any_trial = true;
                          },
                          [](const SnippetGenerated&) {},
                          [&](const SnippetEvaluated& r) { out.evaluations.push_back(r.record); },
                          [&](const TrialCompleted& r) {
                            out.trials.push_back(TrialResult{configs.at(r.trial_id), r.objective, r.status});
                            out.trial_ids.push_back(r.trial_id);
                          }},
               rec.payload);
  }
  return out;
}

Replay replay(const fs::path& path) { return replay(read_log(resolve_log_path(path))); }

std::vector<SnippetGenerated> pending_snippets(const std::vector<LogRecord>& log) {
  std::map<std::string, std::size_t> evaluated;
  for (const LogRecord& rec : log) {
    if (const auto* e = std::get_if<SnippetEvaluated>(&rec.payload)) ++evaluated[e->record.snippet_id];
  }
  std::vector<SnippetGenerated> out;
  for (const LogRecord& rec : log) {
    const auto* g = std::get_if<SnippetGenerated>(&rec.payload);
    if (g == nullptr) continue;
    auto it = evaluated.find(g->snippet_id);
    if (it != evaluated.end() && it->second > 0) {
      --it->second;
      continue;
    }
    out.push_back(*g);
  }
  return out;
}

}  // namespace slt
