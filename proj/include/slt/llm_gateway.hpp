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
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "slt/prompt.hpp"

namespace slt {

struct SamplingParams {
  double temperature = 0.7;         // [0, 2]
  double repetition_penalty = 1.0;  // [1, 2]
  int max_new_tokens = 1024;        // >= 1
  std::optional<std::uint64_t> seed;

  bool operator==(const SamplingParams&) const = default;
};

/// Throws ConfigError when a field is out of range. Called before any request.
void validate(const SamplingParams& params);

enum class FinishReason { Stop, Length, Error };

std::string_view to_string(FinishReason reason);
FinishReason parse_finish_reason(std::string_view name);

struct CompletionResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  double latency_ms = 0.0;
  std::string diagnostic;  // set for Error
};

class Gateway {
 public:
  virtual ~Gateway() = default;

  // Must not throw for transport or protocol failures; those come back as
  // FinishReason::Error. Invalid params are rejected with ConfigError.
  virtual CompletionResponse complete(const RenderedPrompt& prompt, const SamplingParams& params) = 0;
};

// Which request field carries the repetition penalty. Servers that only know
// the OpenAI `frequency_penalty` get (repetition_penalty - 1).
enum class PenaltyField { Repetition, Frequency };

struct EndpointConfig {
  std::string base_url;  // scheme://host[:port]
  std::string api_key;
  std::string model;
  std::string path = "/v1/completions";
  double timeout_s = 120.0;
  PenaltyField penalty_field = PenaltyField::Repetition;

  /// Reads SLT_LLM_ENDPOINT, SLT_LLM_API_KEY and SLT_LLM_MODEL over `base`.
  static EndpointConfig from_env();
  static EndpointConfig from_env(EndpointConfig base);
};

/// Request body for one text completion.
nlohmann::json encode_request(std::string_view prompt, const SamplingParams& params,
                              std::string_view model, PenaltyField field);

/// Reads the sampling fields back out of a request body.
SamplingParams decode_sampling(const nlohmann::json& body);

/// Maps a response body onto a CompletionResponse (latency left at zero).
CompletionResponse decode_response(std::string_view body);

// OpenAI-compatible `POST /v1/completions` client. A transport failure is
// retried once within the overall timeout; HTTP errors are not retried.
class HttpGateway : public Gateway {
 public:
  explicit HttpGateway(EndpointConfig config);

  CompletionResponse complete(const RenderedPrompt& prompt, const SamplingParams& params) override;

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
};

// Replays a fixed script, cycling when exhausted, and records every request.
class MockGateway : public Gateway {
 public:
  struct Request {
    std::string prompt_text;
    SamplingParams params;
  };

  explicit MockGateway(std::vector<CompletionResponse> script);

  CompletionResponse complete(const RenderedPrompt& prompt, const SamplingParams& params) override;

  std::vector<Request> requests() const;

 private:
  std::vector<CompletionResponse> script_;
  mutable std::mutex mu_;
  std::size_t cursor_ = 0;
  std::vector<Request> log_;
};

}  // namespace slt
