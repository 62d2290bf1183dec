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

#include "slt/campaign.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "slt/campaign_store.hpp"
#include "slt/errors.hpp"
#include "slt/hash.hpp"
#include "slt/metrics.hpp"
#include "slt/random.hpp"
#include "slt/snippet_extractor.hpp"
#include "slt/tpe.hpp"

#ifndef SLT_DATA_DIR
#define SLT_DATA_DIR "data"
#endif

namespace slt {
namespace fs = std::filesystem;
using nlohmann::json;

fs::path data_dir() {
  if (const char* env = std::getenv("SLT_DATA_DIR"); env && *env) return env;
  return SLT_DATA_DIR;
}

CampaignConfig default_config() {
  CampaignConfig c;
  c.lexicon = LexiconPaths::bundled(data_dir());
  c.gateway.endpoint = EndpointConfig::from_env();
  return c;
}

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

CampaignConfig config_from_json(const json& j, const fs::path& base_dir) {
  CampaignConfig c = default_config();
  try {
    check_keys(j, "config",
               {"gateway", "prompt", "lexicon", "backend", "reference", "gem5", "compile", "n_trials",
                "snippets_per_trial", "objective_aggregation", "seed", "output_dir", "workers",
                "ipc_threshold", "max_new_tokens", "sampling", "optimization", "include_examples"});
    if (j.contains("gateway")) {
      const json& g = j.at("gateway");
      check_keys(g, "gateway",
                 {"kind", "endpoint", "api_key", "model", "path", "timeout_s", "penalty_field", "script"});
      read(g, "kind", c.gateway.kind);
      read(g, "endpoint", c.gateway.endpoint.base_url);
      read(g, "api_key", c.gateway.endpoint.api_key);
      read(g, "model", c.gateway.endpoint.model);
      read(g, "path", c.gateway.endpoint.path);
      read(g, "timeout_s", c.gateway.endpoint.timeout_s);
      if (g.contains("penalty_field")) {
        const auto f = g.at("penalty_field").get<std::string>();
        if (f == "repetition_penalty") {
          c.gateway.endpoint.penalty_field = PenaltyField::Repetition;
        } else if (f == "frequency_penalty") {
          c.gateway.endpoint.penalty_field = PenaltyField::Frequency;
        } else {
          throw ConfigError("gateway.penalty_field must be repetition_penalty or frequency_penalty");
        }
      }
      if (g.contains("script")) {
        for (const json& item : g.at("script")) {
          CompletionResponse r;
          r.text = item.at("text").get<std::string>();
          r.finish_reason = parse_finish_reason(item.value("finish_reason", std::string("stop")));
          if (r.finish_reason == FinishReason::Error) r.diagnostic = item.value("diagnostic", std::string("scripted error"));
          c.gateway.mock_script.push_back(std::move(r));
        }
      }
      // Environment wins over the file for endpoint settings.
      c.gateway.endpoint = EndpointConfig::from_env(c.gateway.endpoint);
    }
    if (j.contains("prompt")) c.prompt_path = resolve(base_dir, j.at("prompt").get<std::string>());
    if (j.contains("lexicon")) {
      const json& l = j.at("lexicon");
      check_keys(l, "lexicon", {"stopwords", "thesaurus", "frequencies"});
      if (l.contains("stopwords")) c.lexicon.stopwords = resolve(base_dir, l.at("stopwords").get<std::string>());
      if (l.contains("thesaurus")) c.lexicon.thesaurus = resolve(base_dir, l.at("thesaurus").get<std::string>());
      if (l.contains("frequencies")) {
        c.lexicon.frequencies = resolve(base_dir, l.at("frequencies").get<std::string>());
      }
    }
    read(j, "backend", c.backend);
    if (j.contains("reference")) {
      check_keys(j.at("reference"), "reference", {"timeout_s"});
      read(j.at("reference"), "timeout_s", c.reference_timeout_s);
    }
    if (j.contains("gem5")) {
      const json& g = j.at("gem5");
      check_keys(g, "gem5", {"gem5_bin", "config_script", "command_template", "ticks", "ipc_key",
                             "stats_file", "crash_patterns", "timeout_s"});
      read(g, "gem5_bin", c.gem5.gem5_bin);
      if (g.contains("config_script")) {
        c.gem5.config_script = resolve(base_dir, g.at("config_script").get<std::string>()).string();
      }
      read(g, "command_template", c.gem5.command_template);
      read(g, "ticks", c.gem5.ticks);
      read(g, "ipc_key", c.gem5.ipc_key);
      read(g, "stats_file", c.gem5.stats_file);
      read(g, "crash_patterns", c.gem5.crash_patterns);
      read(g, "timeout_s", c.gem5.timeout_s);
    }
    if (j.contains("compile")) {
      const json& cc = j.at("compile");
      check_keys(cc, "compile", {"profile", "command", "timeout_s"});
      if (cc.contains("profile")) c.compile = CompileSpec::profile(cc.at("profile").get<std::string>());
      read(cc, "command", c.compile.command_template);
      read(cc, "timeout_s", c.compile.timeout_s);
    }
    read(j, "n_trials", c.n_trials);
    read(j, "snippets_per_trial", c.snippets_per_trial);
    if (j.contains("objective_aggregation")) {
      const auto a = j.at("objective_aggregation").get<std::string>();
      if (a == "max") {
        c.objective_aggregation = Aggregation::Max;
      } else if (a == "mean") {
        c.objective_aggregation = Aggregation::Mean;
      } else {
        throw ConfigError("objective_aggregation must be max or mean");
      }
    }
    read(j, "seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    read(j, "workers", c.workers);
    read(j, "ipc_threshold", c.ipc_threshold);
    read(j, "max_new_tokens", c.max_new_tokens);
    if (j.contains("sampling")) {
      const json& s = j.at("sampling");
      check_keys(s, "sampling", {"temperature", "repetition_penalty"});
      read(s, "temperature", c.sampling.temperature);
      read(s, "repetition_penalty", c.sampling.repetition_penalty);
    }
    if (j.contains("optimization")) {
      const json& o = j.at("optimization");
      check_keys(o, "optimization", {"algorithms", "optimize_system_prompt", "seed"});
      OptPlan plan;
      for (const json& name : o.at("algorithms")) plan.algorithms.push_back(parse_algorithm(name.get<std::string>()));
      read(o, "optimize_system_prompt", plan.optimize_system_prompt);
      read(o, "seed", plan.seed);
      validate(plan);
      c.optimization = std::move(plan);
    }
    read(j, "include_examples", c.include_examples);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.sampling.max_new_tokens = c.max_new_tokens;
  validate(c);
  return c;
}

CampaignConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void validate(const CampaignConfig& c) {
  if (c.gateway.kind != "http" && c.gateway.kind != "mock") {
    throw ConfigError("gateway.kind must be http or mock");
  }
  if (c.gateway.kind == "mock" && c.gateway.mock_script.empty()) {
    throw ConfigError("mock gateway needs a non-empty gateway.script");
  }
  if (c.backend != "reference" && c.backend != "gem5") throw ConfigError("backend must be reference or gem5");
  if (c.n_trials < 1) throw ConfigError("n_trials must be at least 1");
  if (c.snippets_per_trial < 1) throw ConfigError("snippets_per_trial must be at least 1");
  if (c.max_new_tokens < 1) throw ConfigError("max_new_tokens must be positive");
  if (!(c.gateway.endpoint.timeout_s > 0.0)) throw ConfigError("gateway.timeout_s must be positive");
  if (!(c.reference_timeout_s > 0.0)) throw ConfigError("reference.timeout_s must be positive");
  validate(c.compile);
  validate(c.sampling);
}

std::unique_ptr<Gateway> make_gateway(const CampaignConfig& config) {
  if (config.gateway.kind == "mock") return std::make_unique<MockGateway>(config.gateway.mock_script);
  return std::make_unique<HttpGateway>(config.gateway.endpoint);
}

std::unique_ptr<SimulatorBackend> make_backend(const CampaignConfig& config) {
  if (config.backend == "gem5") return std::make_unique<Gem5Backend>(config.gem5);
  return std::make_unique<ReferenceBackend>(config.reference_timeout_s);
}

std::optional<OptPlan> plan_for_trial(const TrialConfig& trial, std::uint64_t seed) {
  if (!trial.flag(params::kPromptOptEnabled)) return std::nullopt;
  OptPlan plan;
  std::string_view combo = trial.atom(params::kPromptOptAlgorithms);
  while (!combo.empty()) {
    const std::size_t plus = combo.find('+');
    plan.algorithms.push_back(parse_algorithm(combo.substr(0, plus)));
    if (plus == std::string_view::npos) break;
    combo.remove_prefix(plus + 1);
  }
  plan.optimize_system_prompt = trial.flag(params::kOptimizeSystemPrompt);
  plan.seed = seed;
  validate(plan);
  return plan;
}

namespace {

PromptSpec load_prompt(const CampaignConfig& config) {
  if (!config.prompt_path.empty()) return load_prompt_spec(config.prompt_path);
  const fs::path bundled = data_dir() / "prompt.json";
  std::error_code ec;
  if (fs::exists(bundled, ec)) return load_prompt_spec(bundled);
  return default_prompt();
}

std::optional<std::string> check_tooling(const CampaignConfig& config, const SimulatorBackend& backend) {
  if (auto msg = check_compiler(config.compile)) return msg;
  return backend.check_tooling();
}

struct Generated {
  SnippetGenerated record;
  ExtractionResult extraction;
};

// Requests one completion, extracts its code and logs it with its blob.
Generated generate_one(Gateway& gateway, const RenderedPrompt& prompt, const SamplingParams& params,
                       std::optional<std::uint64_t> trial_id, CampaignStore& store) {
  const CompletionResponse resp = gateway.complete(prompt, params);
  Generated g;
  g.extraction = extract_code(resp.text);
  if (resp.finish_reason == FinishReason::Error) g.extraction.diagnostics.push_back(resp.diagnostic);
  g.record.trial_id = trial_id;
  g.record.snippet_id = store.put_blob(snippet_body(g.extraction, resp.text));
  g.record.prompt_hash = content_id(prompt.text);
  g.record.finish_reason = resp.finish_reason;
  g.record.extraction = g.extraction.status;
  store.append(g.record);
  return g;
}

std::string format_config(const TrialConfig& config) { return json(config).dump(); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

int cmd_generate(const CampaignConfig& config, std::size_t count, Gateway& gateway, Streams io) {
  if (count == 0) {
    io.err << "generate: --count must be at least 1\n";
    return kExitBadConfig;
  }
  PromptSpec spec;
  Lexicon lexicon;
  try {
    validate(config);
    spec = load_prompt(config);
    if (config.optimization) {
      lexicon = load_lexicon(config.lexicon);
      spec = apply_plan(spec, *config.optimization, lexicon);
    }
  } catch (const std::invalid_argument& e) {
    io.err << "generate: " << e.what() << '\n';
    return kExitBadConfig;
  }
  const RenderedPrompt prompt = render_prompt(spec, config.include_examples);
  CampaignStore store(config.output_dir);
  for (std::size_t i = 0; i < count; ++i) {
    SamplingParams params = config.sampling;
    params.seed = mix_seed(config.seed, i);
    const Generated g = generate_one(gateway, prompt, params, std::nullopt, store);
    io.out << "snippet " << i << ' ' << g.record.snippet_id << ' ' << to_string(g.record.extraction)
           << " finish=" << to_string(g.record.finish_reason) << '\n';
  }
  return kExitOk;
}

int cmd_generate(const CampaignConfig& config, std::size_t count, Streams io) {
  std::unique_ptr<Gateway> gateway;
  try {
    gateway = make_gateway(config);
  } catch (const ConfigError& e) {
    io.err << "generate: " << e.what() << '\n';
    return kExitBadConfig;
  }
  return cmd_generate(config, count, *gateway, io);
}

int cmd_evaluate(const CampaignConfig& config, const fs::path& dir, Streams io) {
  const auto backend = make_backend(config);
  if (auto msg = check_tooling(config, *backend)) {
    io.err << "evaluate: " << *msg << '\n';
    return kExitMissingTooling;
  }
  std::unique_ptr<CampaignStore> store;
  std::vector<LogRecord> log;
  try {
    store = std::make_unique<CampaignStore>(dir);
    log = read_log(store->log_path());
  } catch (const CorruptLog& e) {
    io.err << "evaluate: " << e.what() << '\n';
    return kExitCorruptLog;
  }
  const std::vector<SnippetGenerated> pending = pending_snippets(log);
  std::vector<ExtractionResult> extractions;
  std::vector<std::string> ids;
  for (const SnippetGenerated& g : pending) {
    ExtractionResult x;
    x.status = g.extraction;
    if (has_code(g.extraction)) x.code = store->read_blob(g.snippet_id);
    extractions.push_back(std::move(x));
    ids.push_back(g.snippet_id);
  }
  const auto records = evaluate_batch(extractions, ids, *backend, config.compile, config.workers);
  for (const EvalRecord& r : records) {
    store->append(SnippetEvaluated{r});
    io.out << r.snippet_id << ' ' << to_string(r.failure);
    if (r.ipc) io.out << " ipc=" << fixed(*r.ipc, 6);
    io.out << '\n';
  }
  io.out << "evaluated " << records.size() << " snippet(s)\n";
  return kExitOk;
}

int cmd_campaign(const CampaignConfig& config, Gateway& gateway, Streams io) {
  PromptSpec base_spec;
  Lexicon lexicon;
  try {
    validate(config);
    base_spec = load_prompt(config);
    lexicon = load_lexicon(config.lexicon);
  } catch (const std::invalid_argument& e) {
    io.err << "campaign: " << e.what() << '\n';
    return kExitBadConfig;
  }
  const auto backend = make_backend(config);
  if (auto msg = check_tooling(config, *backend)) {
    io.err << "campaign: " << *msg << '\n';
    return kExitMissingTooling;
  }

  std::unique_ptr<CampaignStore> store;
  Replay prior;
  try {
    store = std::make_unique<CampaignStore>(config.output_dir);
    prior = replay(read_log(store->log_path()));
  } catch (const CorruptLog& e) {
    io.err << "campaign: " << e.what() << '\n';
    return kExitCorruptLog;
  }

  const SearchSpace space = default_slt_space();
  OptimizerState state{space, prior.trials, config.seed, TpeOptions{}};
  for (const TrialResult& t : state.history) check_in_space(space, t.config);
  const std::size_t remaining =
      config.n_trials > state.history.size() ? config.n_trials - state.history.size() : 0;
  if (!prior.trials.empty()) {
    io.out << "resuming after " << prior.trials.size() << " logged trial(s)\n";
  }

  std::vector<EvalRecord> live = prior.evaluations;
  std::uint64_t next_trial = prior.next_trial_id;
  std::exception_ptr fatal;

  const Objective objective = [&](const TrialConfig& trial) -> TrialResult {
    if (fatal) std::rethrow_exception(fatal);
    const std::uint64_t trial_id = next_trial++;
    try {
      store->append(TrialStarted{trial_id, trial});
      RenderedPrompt prompt;
      try {
        PromptSpec spec = base_spec;
        if (auto plan = plan_for_trial(trial, mix_seed(config.seed, trial_id))) {
          spec = apply_plan(spec, *plan, lexicon);
        }
        prompt = render_prompt(spec, trial.flag(params::kIncludeExamples));
      } catch (const std::invalid_argument& e) {
        io.err << "trial " << trial_id << ": prompt rejected: " << e.what() << '\n';
        store->append(TrialCompleted{trial_id, 0.0, TrialStatus::Failed});
        return TrialResult{trial, 0.0, TrialStatus::Failed};
      }

      SamplingParams params;
      params.temperature = trial.real(params::kTemperature);
      params.repetition_penalty = trial.real(params::kRepetitionPenalty);
      params.max_new_tokens = config.max_new_tokens;

      std::vector<ExtractionResult> extractions;
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < config.snippets_per_trial; ++i) {
        params.seed = mix_seed(mix_seed(config.seed, trial_id), i);
        Generated g = generate_one(gateway, prompt, params, trial_id, *store);
        extractions.push_back(std::move(g.extraction));
        ids.push_back(g.record.snippet_id);
      }
      const auto records = evaluate_batch(extractions, ids, *backend, config.compile, config.workers);
      double best = 0.0;
      double sum = 0.0;
      for (const EvalRecord& r : records) {
        store->append(SnippetEvaluated{r});
        live.push_back(r);
        const double v = r.ipc.value_or(0.0);
        best = std::max(best, v);
        sum += v;
      }
      const double value = config.objective_aggregation == Aggregation::Max
                               ? best
                               : sum / static_cast<double>(records.size());
      store->append(TrialCompleted{trial_id, value, TrialStatus::Completed});
      io.out << "trial " << trial_id << " objective=" << fixed(value, 6) << ' ' << format_config(trial)
             << '\n';
      return TrialResult{trial, value, TrialStatus::Completed};
    } catch (...) {
      fatal = std::current_exception();
      throw;
    }
  };

  StudyResult study;
  try {
    study = run_study(objective, std::move(state), remaining);
    if (fatal) std::rethrow_exception(fatal);
  } catch (const std::exception& e) {
    io.err << "campaign aborted: " << e.what() << '\n';
    return kExitMissingTooling;
  }

  if (!live.empty()) {
    const CampaignStats stats = campaign_stats(live, config.ipc_threshold);
    std::ofstream(config.output_dir / "stats.json") << to_json(stats).dump(2) << '\n';
    io.out << format_report(stats);
  }
  if (study.best) {
    io.out << "best objective " << fixed(study.best->objective, 6) << " with "
           << format_config(study.best->config) << '\n';
  } else {
    io.out << "no completed trial\n";
  }
  return kExitOk;
}

int cmd_campaign(const CampaignConfig& config, Streams io) {
  std::unique_ptr<Gateway> gateway;
  try {
    gateway = make_gateway(config);
  } catch (const ConfigError& e) {
    io.err << "campaign: " << e.what() << '\n';
    return kExitBadConfig;
  }
  return cmd_campaign(config, *gateway, io);
}

int cmd_report(const fs::path& log, double ipc_threshold, const std::optional<fs::path>& json_out,
               Streams io) {
  const fs::path log_path = resolve_log_path(log);
  std::error_code ec;
  if (!fs::exists(log_path, ec)) {
    io.err << "report: no log at " << log_path.string() << '\n';
    return kExitCorruptLog;
  }
  Replay r;
  try {
    r = replay(read_log(log_path));
  } catch (const CorruptLog& e) {
    io.err << "report: " << e.what() << '\n';
    return kExitCorruptLog;
  }
  if (r.evaluations.empty()) {
    io.err << "report: empty campaign\n";
    return kExitCorruptLog;
  }
  const CampaignStats stats = campaign_stats(r.evaluations, ipc_threshold);
  io.out << format_report(stats);
  const fs::path out = json_out ? *json_out : log_path.parent_path() / "report.json";
  std::ofstream(out) << to_json(stats).dump(2) << '\n';
  return kExitOk;
}

int cmd_replay(const fs::path& log, Streams io) {
  std::vector<LogRecord> records;
  try {
    records = read_log(resolve_log_path(log));
  } catch (const CorruptLog& e) {
    io.err << "replay: " << e.what() << '\n';
    return kExitCorruptLog;
  }
  const Replay r = replay(records);
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    io.out << "trial " << r.trial_ids[i] << ' ' << to_string(r.trials[i].status)
           << " objective=" << fixed(r.trials[i].objective, 6) << ' ' << format_config(r.trials[i].config)
           << '\n';
  }
  io.out << "records " << records.size() << ", trials " << r.trials.size() << ", evaluations "
         << r.evaluations.size() << '\n';
  if (auto best = best_trial(r.trials)) io.out << "best objective " << fixed(best->objective, 6) << '\n';
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"LLM-driven test program generation harness"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON campaign configuration")->check(CLI::ExistingFile);

  std::size_t count = 0;
  std::string out_dir;
  auto* generate = app.add_subcommand("generate", "request completions and log extracted snippets");
  generate->add_option("--count", count, "number of completions")->required();
  generate->add_option("--out", out_dir, "campaign directory");

  std::string eval_dir;
  auto* evaluate = app.add_subcommand("evaluate", "compile and run snippets that have not been evaluated");
  evaluate->add_option("dir", eval_dir, "campaign directory")->required();

  std::optional<std::size_t> trials;
  std::optional<std::size_t> snippets;
  std::optional<std::uint64_t> seed;
  auto* campaign = app.add_subcommand("campaign", "run the hyperparameter search");
  campaign->add_option("--trials", trials, "number of trials");
  campaign->add_option("--snippets", snippets, "snippets per trial");
  campaign->add_option("--seed", seed, "study seed");
  campaign->add_option("--out", out_dir, "campaign directory");

  std::string log_path;
  double threshold = kDefaultIpcThreshold;
  std::string json_out;
  auto* report = app.add_subcommand("report", "print pass@k statistics for a campaign log");
  report->add_option("log", log_path, "campaign directory or campaign.jsonl")->required();
  report->add_option("--threshold", threshold, "IPC threshold of the second pass definition");
  report->add_option("--json", json_out, "where to write the JSON report");

  auto* replay_cmd = app.add_subcommand("replay", "list the trials recorded in a campaign log");
  replay_cmd->add_option("log", log_path, "campaign directory or campaign.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadConfig;
  }

  Streams io{std::cout, std::cerr};
  if (*report) {
    return cmd_report(log_path, threshold,
                      json_out.empty() ? std::nullopt : std::optional<fs::path>(json_out), io);
  }
  if (*replay_cmd) return cmd_replay(log_path, io);

  CampaignConfig config;
  try {
    config = config_path.empty() ? default_config() : load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (trials) config.n_trials = *trials;
    if (snippets) config.snippets_per_trial = *snippets;
    if (seed) config.seed = *seed;
    validate(config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitBadConfig;
  }
  if (*generate) return cmd_generate(config, count, io);
  if (*evaluate) return cmd_evaluate(config, eval_dir, io);
  return cmd_campaign(config, io);
}

}  // namespace slt
