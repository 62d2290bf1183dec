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

#include "slt/prompt.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "slt/errors.hpp"

namespace slt {
namespace {

constexpr std::string_view kSystemText =
    "You are a C code generator. "
    "Only respond with generated code and no explanation. "
    "Do not justify the code. "
    "Do not return C++. "
    "Always embed the generated code in Markdown code tags. "
    "If a question does not make any sense, or is not factually coherent, explain why instead of "
    "answering something not correct. "
    "If you don't know the answer to a question, please don't share false information.";

constexpr std::string_view kUserText =
    "Write a single program that aims for a high number of instructions per cycle. "
    "Don't forget to include all the necessary header files. "
    "If you use math functions include math.h.";

constexpr std::string_view kMarkers[] = {"[INST]", "[/INST]", "<<SYS>>", "<</SYS>>"};

bool is_blank(std::string_view s) {
  for (char ch : s) {
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

void check_text(std::string_view name, std::string_view text) {
  if (is_blank(text)) throw InvalidSpec(std::string(name) + " is empty");
  for (std::string_view marker : kMarkers) {
    if (text.find(marker) != std::string_view::npos) {
      throw InvalidSpec(std::string(name) + " contains the reserved marker " + std::string(marker));
    }
  }
}

}  // namespace

PromptSpec default_prompt() {
  return PromptSpec{std::string(kSystemText), std::string(kUserText), {}, std::string(kLlama2Inst)};
}

void validate(const PromptSpec& spec) {
  check_text("system_text", spec.system_text);
  check_text("user_text", spec.user_text);
  if (spec.chat_template != kLlama2Inst) {
    throw InvalidSpec("unsupported chat_template '" + spec.chat_template + "'");
  }
  for (const CodeExample& ex : spec.examples) {
    if (ex.source_text.empty()) throw InvalidSpec("example '" + ex.label + "' has no source");
    if (ex.source_text.find("```") != std::string::npos) {
      throw InvalidSpec("example '" + ex.label + "' contains a code fence");
    }
    for (std::string_view marker : kMarkers) {
      if (ex.source_text.find(marker) != std::string::npos) {
        throw InvalidSpec("example '" + ex.label + "' contains the reserved marker " +
                          std::string(marker));
      }
    }
  }
}

RenderedPrompt render_prompt(const PromptSpec& spec, bool include_examples) {
  validate(spec);
  std::string out;
  out.reserve(spec.system_text.size() + spec.user_text.size() + 64);
  out += "<s>[INST]<<SYS>>\n";
  out += spec.system_text;
  out += "\n<</SYS>>\n\n";
  out += spec.user_text;
  if (include_examples && !spec.examples.empty()) {
    for (const CodeExample& ex : spec.examples) {
      out += "\n\n";
      out += kExampleIntro;
      out += "\n```c\n";
      out += ex.source_text;
      if (ex.source_text.back() != '\n') out += '\n';
      out += "```";
    }
    out += '\n';
  }
  out += "[/INST]";
  const std::size_t tokens = count_whitespace_tokens(out);
  return RenderedPrompt{std::move(out), tokens};
}

std::size_t count_whitespace_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

void to_json(nlohmann::json& j, const PromptSpec& spec) {
  nlohmann::json examples = nlohmann::json::array();
  for (const CodeExample& ex : spec.examples) {
    examples.push_back({{"label", ex.label}, {"source", ex.source_text}});
  }
  j = nlohmann::json{{"system_text", spec.system_text},
                     {"user_text", spec.user_text},
                     {"examples", std::move(examples)},
                     {"chat_template", spec.chat_template}};
}

void from_json(const nlohmann::json& j, PromptSpec& spec) {
  try {
    spec.system_text = j.at("system_text").get<std::string>();
    spec.user_text = j.at("user_text").get<std::string>();
    spec.examples.clear();
    if (j.contains("examples")) {
      for (const auto& ex : j.at("examples")) {
        spec.examples.push_back(
            CodeExample{ex.at("label").get<std::string>(), ex.at("source").get<std::string>()});
      }
    }
    spec.chat_template = j.value("chat_template", std::string(kLlama2Inst));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("malformed prompt spec: ") + e.what());
  }
}

PromptSpec load_prompt_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec("cannot open prompt spec " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidSpec("prompt spec " + path.string() + " is not valid JSON: " + e.what());
  }
  PromptSpec spec = doc.get<PromptSpec>();
  validate(spec);
  return spec;
}

}  // namespace slt
