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

#include "slt/llm_gateway.hpp"

#include <chrono>
#include <cstdlib>

#include "httplib.h"
#include "slt/errors.hpp"

namespace slt {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

CompletionResponse error_response(std::string diagnostic, double latency_ms) {
  return CompletionResponse{{}, FinishReason::Error, latency_ms, std::move(diagnostic)};
}

void set_timeouts(httplib::Client& client, double seconds) {
  const auto usec = static_cast<time_t>(std::max(seconds, 0.001) * 1e6);
  client.set_connection_timeout(usec / 1000000, usec % 1000000);
  client.set_read_timeout(usec / 1000000, usec % 1000000);
  client.set_write_timeout(usec / 1000000, usec % 1000000);
}

}  // namespace

void validate(const SamplingParams& params) {
  if (!(params.temperature >= 0.0 && params.temperature <= 2.0)) {
    throw ConfigError("temperature " + std::to_string(params.temperature) + " outside [0, 2]");
  }
  if (!(params.repetition_penalty >= 1.0 && params.repetition_penalty <= 2.0)) {
    throw ConfigError("repetition_penalty " + std::to_string(params.repetition_penalty) +
                      " outside [1, 2]");
  }
  if (params.max_new_tokens < 1) throw ConfigError("max_new_tokens must be positive");
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

FinishReason parse_finish_reason(std::string_view name) {
  if (name == "stop") return FinishReason::Stop;
  if (name == "length") return FinishReason::Length;
  if (name == "error") return FinishReason::Error;
  throw ConfigError("unknown finish reason '" + std::string(name) + "'");
}

EndpointConfig EndpointConfig::from_env() { return from_env(EndpointConfig{}); }

EndpointConfig EndpointConfig::from_env(EndpointConfig base) {
  if (const char* v = std::getenv("SLT_LLM_ENDPOINT"); v && *v) base.base_url = v;
  if (const char* v = std::getenv("SLT_LLM_API_KEY"); v && *v) base.api_key = v;
  if (const char* v = std::getenv("SLT_LLM_MODEL"); v && *v) base.model = v;
  return base;
}

nlohmann::json encode_request(std::string_view prompt, const SamplingParams& params,
                              std::string_view model, PenaltyField field) {
  nlohmann::json body{{"prompt", prompt},
                      {"temperature", params.temperature},
                      {"max_tokens", params.max_new_tokens}};
  if (!model.empty()) body["model"] = model;
  if (field == PenaltyField::Repetition) {
    body["repetition_penalty"] = params.repetition_penalty;
  } else {
    body["frequency_penalty"] = params.repetition_penalty - 1.0;
  }
  if (params.seed) body["seed"] = *params.seed;
  return body;
}

SamplingParams decode_sampling(const nlohmann::json& body) {
  SamplingParams p;
  p.temperature = body.at("temperature").get<double>();
  p.max_new_tokens = body.at("max_tokens").get<int>();
  if (body.contains("repetition_penalty")) {
    p.repetition_penalty = body.at("repetition_penalty").get<double>();
  } else if (body.contains("frequency_penalty")) {
    p.repetition_penalty = body.at("frequency_penalty").get<double>() + 1.0;
  }
  if (body.contains("seed") && !body.at("seed").is_null()) {
    p.seed = body.at("seed").get<std::uint64_t>();
  }
  return p;
}

CompletionResponse decode_response(std::string_view body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return error_response("response is not a JSON object", 0);
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty() ||
      !(*choices)[0].is_object()) {
    return error_response("response has no choices", 0);
  }
  const auto& choice = (*choices)[0];
  const auto text = choice.find("text");
  if (text == choice.end() || !text->is_string()) return error_response("choice has no text", 0);
  CompletionResponse out;
  out.text = text->get<std::string>();
  const auto reason = choice.find("finish_reason");
  if (reason != choice.end() && reason->is_string() && reason->get<std::string>() == "length") {
    out.finish_reason = FinishReason::Length;
  }
  return out;
}

HttpGateway::HttpGateway(EndpointConfig config) : config_(std::move(config)) {}

CompletionResponse HttpGateway::complete(const RenderedPrompt& prompt, const SamplingParams& params) {
  validate(params);
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(config_.timeout_s));
  if (config_.base_url.empty()) return error_response("no endpoint configured (SLT_LLM_ENDPOINT)", 0);

  PenaltyField field = config_.penalty_field;
  bool fell_back = false;
  int transport_attempts = 0;
  std::string last_error;
  while (true) {
    const double remaining = std::chrono::duration<double>(deadline - Clock::now()).count();
    if (remaining <= 0.0) {
      return error_response("timed out" + (last_error.empty() ? "" : ": " + last_error),
                            elapsed_ms(start));
    }
    httplib::Client client(config_.base_url);
    set_timeouts(client, remaining);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    const std::string body = encode_request(prompt.text, params, config_.model, field).dump();
    auto res = client.Post(config_.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      if (++transport_attempts < 2) continue;
      return error_response(last_error, elapsed_ms(start));
    }
    if (res->status >= 400 && res->status < 500 && !fell_back && field == PenaltyField::Repetition &&
        res->body.find("repetition_penalty") != std::string::npos) {
      field = PenaltyField::Frequency;
      fell_back = true;
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      return error_response("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512),
                            elapsed_ms(start));
    }
    CompletionResponse out = decode_response(res->body);
    out.latency_ms = elapsed_ms(start);
    return out;
  }
}

MockGateway::MockGateway(std::vector<CompletionResponse> script) : script_(std::move(script)) {
  if (script_.empty()) throw ConfigError("mock gateway script is empty");
}

CompletionResponse MockGateway::complete(const RenderedPrompt& prompt, const SamplingParams& params) {
  validate(params);
  std::lock_guard lock(mu_);
  log_.push_back(Request{prompt.text, params});
  CompletionResponse out = script_[cursor_];
  cursor_ = (cursor_ + 1) % script_.size();
  return out;
}

std::vector<MockGateway::Request> MockGateway::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace slt
