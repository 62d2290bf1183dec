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

#include "slt/eval_harness.hpp"

#include <algorithm>
#include <mutex>
#include <atomic>
#include <cctype>
#include <cmath>
#include <csignal>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "slt/errors.hpp"
#include "slt/hash.hpp"

namespace slt {
namespace fs = std::filesystem;

namespace {

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t at = haystack.find(needle); at != std::string_view::npos;
       at = haystack.find(needle, at + needle.size())) {
    ++n;
  }
  return n;
}

std::string tail_text(const std::string& s, std::size_t max_len = 4096) {
  return s.size() <= max_len ? s : s.substr(s.size() - max_len);
}

}  // namespace

// ---------------------------------------------------------------------------
// Compilation

CompileSpec CompileSpec::host() { return CompileSpec{}; }

CompileSpec CompileSpec::riscv() {
  CompileSpec spec;
  spec.command_template = "riscv64-linux-gnu-gcc -O1 -static -w {src} -o {out}";
  return spec;
}

CompileSpec CompileSpec::profile(std::string_view name) {
  if (name == "host") return host();
  if (name == "riscv") return riscv();
  throw ConfigError("unknown compile profile '" + std::string(name) + "'");
}

void validate(const CompileSpec& spec) {
  if (count_occurrences(spec.command_template, "{src}") != 1 ||
      count_occurrences(spec.command_template, "{out}") != 1) {
    throw ConfigError("compile command must contain {src} and {out} exactly once: " +
                      spec.command_template);
  }
  if (!(spec.timeout_s > 0.0)) throw ConfigError("compile timeout must be positive");
}

std::optional<std::string> check_compiler(const CompileSpec& spec) {
  const auto argv = split_command(spec.command_template);
  if (argv.empty()) return "compile command is empty";
  if (!find_executable(argv[0])) {
    return "compiler '" + argv[0] + "' not found on PATH; install it or set compile.command";
  }
  return std::nullopt;
}

CompileResult compile_snippet(std::string_view source, const CompileSpec& spec) {
  validate(spec);
  if (source.empty()) return CompileError{CompileErrorKind::NonZeroExit, "empty source"};
  TempDir dir(spec.temp_root);
  const fs::path src = dir.path() / "snippet.c";
  const fs::path out = dir.path() / "snippet";
  {
    std::ofstream f(src, std::ios::binary);
    f.write(source.data(), static_cast<std::streamsize>(source.size()));
    if (!f) throw IoError("cannot write " + src.string());
  }
  const auto argv = expand_command(spec.command_template, {{"src", src.string()}, {"out", out.string()}});
  ProcessOptions opts;
  opts.cwd = dir.path();
  opts.timeout_s = spec.timeout_s;
  const ProcessResult r = run_process(argv, opts);
  if (!r.spawned) {
    return CompileError{CompileErrorKind::MissingToolchain, "missing toolchain: " + r.err};
  }
  if (r.timed_out) {
    return CompileError{CompileErrorKind::Timeout,
                        "compiler timed out after " + std::to_string(spec.timeout_s) + " s"};
  }
  if (!r.ok()) {
    std::string diag = tail_text(r.err.empty() ? r.out : r.err);
    // Drop the temp dir so identical sources give identical diagnostics.
    const std::string prefix = dir.path().string() + "/";
    for (auto at = diag.find(prefix); at != std::string::npos; at = diag.find(prefix, at)) {
      diag.erase(at, prefix.size());
    }
    if (diag.empty()) diag = "compiler exited with status " + std::to_string(r.exit_code);
    return CompileError{CompileErrorKind::NonZeroExit, std::move(diag)};
  }
  if (!fs::exists(out)) {
    return CompileError{CompileErrorKind::NonZeroExit, "compiler produced no binary"};
  }
  return CompiledBinary{std::move(dir), out};
}

// ---------------------------------------------------------------------------
// Simulation

std::string_view to_string(SimStatus status) {
  switch (status) {
    case SimStatus::Ok: return "ok";
    case SimStatus::Crash: return "crash";
    case SimStatus::Timeout: return "timeout";
    case SimStatus::SimError: return "sim_error";
  }
  return "sim_error";
}

SimStatus parse_sim_status(std::string_view name) {
  for (auto s : {SimStatus::Ok, SimStatus::Crash, SimStatus::Timeout, SimStatus::SimError}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown simulation status '" + std::string(name) + "'");
}

namespace {

// The stats line that carries `key`, if any (last one wins).
std::optional<std::pair<std::string_view, double>> find_stat(std::string_view stats,
                                                             std::string_view key) {
  std::optional<std::pair<std::string_view, double>> found;
  std::size_t pos = 0;
  while (pos < stats.size()) {
    std::size_t eol = stats.find('\n', pos);
    if (eol == std::string_view::npos) eol = stats.size();
    const std::string_view line = stats.substr(pos, eol - pos);
    pos = eol + 1;

    std::size_t b = 0;
    while (b < line.size() && is_space(line[b])) ++b;
    std::size_t e = b;
    while (e < line.size() && !is_space(line[e])) ++e;
    if (line.substr(b, e - b) != key) continue;
    std::size_t vb = e;
    while (vb < line.size() && is_space(line[vb])) ++vb;
    std::size_t ve = vb;
    while (ve < line.size() && !is_space(line[ve])) ++ve;
    const std::string value(line.substr(vb, ve - vb));
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
      found.reset();
      continue;
    }
    found = std::make_pair(line, v);
  }
  return found;
}

}  // namespace

std::optional<double> parse_stats_ipc(std::string_view stats_text, std::string_view key) {
  if (auto f = find_stat(stats_text, key)) return f->second;
  return std::nullopt;
}

SimOutcome run_gem5(const fs::path& binary, const Gem5Config& config) {
  SimOutcome outcome;
  TempDir run_dir(config.temp_root);
  const auto argv = expand_command(config.command_template,
                                   {{"gem5_bin", config.gem5_bin},
                                    {"config_script", config.config_script},
                                    {"binary", fs::absolute(binary).string()},
                                    {"ticks", std::to_string(config.ticks)},
                                    {"outdir", (run_dir.path() / "m5out").string()}});
  ProcessOptions opts;
  opts.cwd = run_dir.path();
  opts.timeout_s = config.timeout_s;
  const ProcessResult r = run_process(argv, opts);
  outcome.wall_ms = r.wall_ms;
  if (!r.spawned) {
    outcome.status = SimStatus::SimError;
    outcome.diagnostic = r.err;
    return outcome;
  }
  if (r.timed_out) {
    outcome.status = SimStatus::Timeout;
    outcome.diagnostic = "simulator exceeded " + std::to_string(config.timeout_s) + " s";
    return outcome;
  }
  for (const std::string& pattern : config.crash_patterns) {
    if (!pattern.empty() && r.err.find(pattern) != std::string::npos) {
      outcome.status = SimStatus::Crash;
      outcome.diagnostic = "guest fault (matched '" + pattern + "'): " + tail_text(r.err, 1024);
      return outcome;
    }
  }
  if (r.term_signal == SIGABRT || r.term_signal == SIGSEGV) {
    outcome.status = SimStatus::Crash;
    outcome.diagnostic = "simulator aborted with signal " + std::to_string(r.term_signal);
    return outcome;
  }
  std::ifstream in(run_dir.path() / config.stats_file, std::ios::binary);
  std::string stats((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto stat = find_stat(stats, config.ipc_key);
  if (!r.ok() || !stat) {
    outcome.status = SimStatus::SimError;
    outcome.diagnostic = !r.ok() ? "simulator exited abnormally: " + tail_text(r.err, 1024)
                                 : "stats key '" + config.ipc_key + "' not found";
    return outcome;
  }
  outcome.status = SimStatus::Ok;
  outcome.ipc = stat->second;
  outcome.raw_stats = std::string(stat->first);
  return outcome;
}

std::string normalize_whitespace(std::string_view source) {
  std::string out;
  out.reserve(source.size());
  bool pending_space = false;
  for (char ch : source) {
    if (is_space(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += ch;
  }
  return out;
}

ReferenceFeatures reference_features(std::string_view src) {
  ReferenceFeatures f;
  f.hash = fnv1a64(normalize_whitespace(src));

  static constexpr std::string_view kThree[] = {"<<=", ">>=", "..."};
  static constexpr std::string_view kTwo[] = {"->", "++", "--", "+=", "-=", "*=", "/=", "%=",
                                              "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
                                              "&=", "|=", "^=", "##"};
  static constexpr std::string_view kArithmetic[] = {"+",  "-",  "*",  "/",  "%",  "++",
                                                     "--", "+=", "-=", "*=", "/=", "%="};

  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  bool line_start = true;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      line_start = true;
      ++i;
      continue;
    }
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (line_start && c == '#') {
      // Directive, with backslash continuations.
      while (i < n && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') ++i;
        ++i;
      }
      continue;
    }
    line_start = false;
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      const std::size_t end = src.find("*/", i + 2);
      i = end == std::string_view::npos ? n : end + 2;
      continue;
    }
    if (c == '"' || c == '\'') {
      ++i;
      while (i < n && src[i] != c && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < n) ++i;
        ++i;
      }
      if (i < n && src[i] == c) ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      ++i;
      while (i < n) {
        const char d = src[i];
        if ((d == '+' || d == '-') && std::strchr("eEpP", src[i - 1]) != nullptr) {
          ++i;
        } else if (ident_char(d) || d == '.') {
          ++i;
        } else {
          break;
        }
      }
      continue;
    }
    if (ident_char(c)) {
      const std::size_t b = i;
      while (i < n && ident_char(src[i])) ++i;
      const std::string_view word = src.substr(b, i - b);
      if (word == "for" || word == "while" || word == "do") f.has_loop = true;
      continue;
    }
    std::string_view tok = src.substr(i, 1);
    for (std::string_view p : kThree) {
      if (src.substr(i, 3) == p) tok = p;
    }
    if (tok.size() == 1) {
      for (std::string_view p : kTwo) {
        if (src.substr(i, 2) == p) tok = p;
      }
    }
    if (std::find(std::begin(kArithmetic), std::end(kArithmetic), tok) != std::end(kArithmetic)) {
      ++f.arithmetic_ops;
    }
    i += tok.size();
  }
  return f;
}

double reference_ipc(std::string_view source) {
  const ReferenceFeatures f = reference_features(source);
  const double a = static_cast<double>(f.arithmetic_ops);
  const double loop = f.has_loop ? 1.0 : 0.0;
  const double unrolled = f.arithmetic_ops >= 8 ? 1.0 : 0.0;
  const double v = 0.10 + 0.02 * a + 0.40 * loop + 0.40 * unrolled +
                   0.001 * static_cast<double>(f.hash % 200);
  return std::clamp(v, 0.0, kReferenceIssueWidth);
}

SimOutcome run_reference(std::string_view source, const fs::path& binary, double timeout_s) {
  SimOutcome outcome;
  ProcessOptions opts;
  opts.cwd = binary.parent_path();
  opts.timeout_s = timeout_s;
  const ProcessResult r = run_process({fs::absolute(binary).string()}, opts);
  outcome.wall_ms = r.wall_ms;
  if (!r.spawned) {
    outcome.status = SimStatus::SimError;
    outcome.diagnostic = r.err;
  } else if (r.timed_out) {
    outcome.status = SimStatus::Timeout;
    outcome.diagnostic = "no exit within " + std::to_string(timeout_s) + " s";
  } else if (!r.exited) {
    outcome.status = SimStatus::Crash;
    outcome.diagnostic = std::string("killed by signal ") + std::to_string(r.term_signal) + " (" +
                         strsignal(r.term_signal) + ")";
  } else {
    outcome.status = SimStatus::Ok;
    outcome.ipc = reference_ipc(source);
  }
  return outcome;
}

SimOutcome ReferenceBackend::run(std::string_view source, const fs::path& binary) const {
  return run_reference(source, binary, timeout_s_);
}

SimOutcome Gem5Backend::run(std::string_view, const fs::path& binary) const {
  return run_gem5(binary, config_);
}

std::optional<std::string> Gem5Backend::check_tooling() const {
  if (config_.gem5_bin.empty()) return "gem5 backend selected but gem5.gem5_bin is not set";
  if (!find_executable(config_.gem5_bin)) {
    return "gem5 executable '" + config_.gem5_bin +
           "' not found; build gem5 and point gem5.gem5_bin at it";
  }
  std::error_code ec;
  if (config_.config_script.empty() || !fs::exists(config_.config_script, ec)) {
    return "gem5 config script '" + config_.config_script + "' not found; set gem5.config_script";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Evaluation

std::string_view to_string(FailureClass failure) {
  switch (failure) {
    case FailureClass::CompileError: return "compile_error";
    case FailureClass::SimCrash: return "sim_crash";
    case FailureClass::SimTimeout: return "sim_timeout";
    case FailureClass::ParseFailure: return "parse_failure";
    case FailureClass::Refusal: return "refusal";
    case FailureClass::Incomplete: return "incomplete";
    case FailureClass::None: return "none";
  }
  return "none";
}

FailureClass parse_failure_class(std::string_view name) {
  for (FailureClass f : kAllFailureClasses) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown failure class '" + std::string(name) + "'");
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const EvalRecord& record) {
  nlohmann::json outcome = nullptr;
  if (record.outcome) {
    const SimOutcome& o = *record.outcome;
    outcome = {{"status", to_string(o.status)},
               {"ipc", optional_number(o.ipc)},
               {"raw_stats", o.raw_stats ? nlohmann::json(*o.raw_stats) : nlohmann::json(nullptr)},
               {"wall_ms", o.wall_ms},
               {"diagnostic", o.diagnostic}};
  }
  j = nlohmann::json{{"snippet_id", record.snippet_id},
                     {"extraction", to_string(record.extraction)},
                     {"compile_ok", record.compile_ok},
                     {"outcome", std::move(outcome)},
                     {"failure", to_string(record.failure)},
                     {"ipc", optional_number(record.ipc)},
                     {"diagnostic", record.diagnostic}};
}

void from_json(const nlohmann::json& j, EvalRecord& record) {
  record.snippet_id = j.at("snippet_id").get<std::string>();
  record.extraction = parse_extraction_status(j.at("extraction").get<std::string>());
  record.compile_ok = j.at("compile_ok").get<bool>();
  record.outcome.reset();
  if (j.contains("outcome") && !j.at("outcome").is_null()) {
    const auto& o = j.at("outcome");
    SimOutcome out;
    out.status = parse_sim_status(o.at("status").get<std::string>());
    out.ipc = read_optional_number(o, "ipc");
    if (o.contains("raw_stats") && !o.at("raw_stats").is_null()) {
      out.raw_stats = o.at("raw_stats").get<std::string>();
    }
    out.wall_ms = o.value("wall_ms", 0.0);
    out.diagnostic = o.value("diagnostic", std::string());
    record.outcome = std::move(out);
  }
  record.failure = parse_failure_class(j.at("failure").get<std::string>());
  record.ipc = read_optional_number(j, "ipc");
  record.diagnostic = j.value("diagnostic", std::string());
}

std::string snippet_body(const ExtractionResult& extraction, std::string_view raw_response) {
  return extraction.code ? *extraction.code : std::string(raw_response);
}

EvalRecord evaluate_snippet(const ExtractionResult& extraction, const SimulatorBackend& backend,
                            const CompileSpec& compile_spec, std::string_view snippet_id) {
  EvalRecord rec;
  rec.snippet_id = snippet_id.empty() ? content_id(extraction.code.value_or(std::string()))
                                      : std::string(snippet_id);
  rec.extraction = extraction.status;
  switch (extraction.status) {
    case ExtractionStatus::Refusal:
      rec.failure = FailureClass::Refusal;
      rec.diagnostic = "model refused or answered in prose";
      return rec;
    case ExtractionStatus::Empty:
      rec.failure = FailureClass::ParseFailure;
      rec.diagnostic = "no code in response";
      return rec;
    default:
      break;
  }
  CompileResult compiled = compile_snippet(*extraction.code, compile_spec);
  if (auto* err = std::get_if<CompileError>(&compiled)) {
    rec.failure = extraction.status == ExtractionStatus::Unterminated ? FailureClass::Incomplete
                                                                      : FailureClass::CompileError;
    rec.diagnostic = err->diagnostic;
    return rec;
  }
  rec.compile_ok = true;
  auto& bin = std::get<CompiledBinary>(compiled);
  SimOutcome outcome = backend.run(*extraction.code, bin.binary);
  switch (outcome.status) {
    case SimStatus::Ok:
      rec.failure = FailureClass::None;
      rec.ipc = outcome.ipc;
      break;
    case SimStatus::Timeout:
      rec.failure = FailureClass::SimTimeout;
      rec.diagnostic = outcome.diagnostic;
      break;
    case SimStatus::Crash:
    case SimStatus::SimError:
      rec.failure = FailureClass::SimCrash;
      rec.diagnostic = outcome.diagnostic;
      break;
  }
  rec.outcome = std::move(outcome);
  return rec;
}

std::vector<EvalRecord> evaluate_batch(std::span<const ExtractionResult> extractions,
                                       std::span<const std::string> snippet_ids,
                                       const SimulatorBackend& backend,
                                       const CompileSpec& compile_spec, std::size_t workers) {
  if (!snippet_ids.empty() && snippet_ids.size() != extractions.size()) {
    throw std::invalid_argument("evaluate_batch: one snippet id per extraction");
  }
  std::vector<EvalRecord> out(extractions.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, extractions.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < extractions.size(); i = next++) {
      try {
        out[i] = evaluate_snippet(extractions[i], backend, compile_spec,
                                  snippet_ids.empty() ? std::string_view{} : snippet_ids[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace slt
