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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace slt {

struct CodeExample {
  std::string label;
  std::string source_text;

  bool operator==(const CodeExample&) const = default;
};

inline constexpr std::string_view kLlama2Inst = "llama2-inst";

// System text, user text and optional example programs that render into a
// single Llama-2 style instruction prompt.
struct PromptSpec {
  std::string system_text;
  std::string user_text;
  std::vector<CodeExample> examples;
  std::string chat_template{kLlama2Inst};

  bool operator==(const PromptSpec&) const = default;
};

struct RenderedPrompt {
  std::string text;
  std::size_t approx_tokens = 0;
};

/// Sentence that introduces each example program inside the prompt.
inline constexpr std::string_view kExampleIntro = "Here is an example program that compiles and runs:";

PromptSpec default_prompt();

/// Throws InvalidSpec if `spec` breaks an invariant.
void validate(const PromptSpec& spec);

/// Renders `<s>[INST]<<SYS>>...<</SYS>>...[/INST]`. Examples are appended to
/// the user section only when `include_examples` is set.
RenderedPrompt render_prompt(const PromptSpec& spec, bool include_examples);

/// Number of whitespace-separated tokens.
std::size_t count_whitespace_tokens(std::string_view text);

void to_json(nlohmann::json& j, const PromptSpec& spec);
void from_json(const nlohmann::json& j, PromptSpec& spec);

/// Reads and validates a prompt spec document.
PromptSpec load_prompt_spec(const std::filesystem::path& path);

}  // namespace slt
