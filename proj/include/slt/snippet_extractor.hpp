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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slt {

enum class ExtractionStatus { Fenced, BareCode, Unterminated, Refusal, Empty };

std::string_view to_string(ExtractionStatus status);
ExtractionStatus parse_extraction_status(std::string_view name);

/// True for the statuses that carry code.
constexpr bool has_code(ExtractionStatus status) {
  return status == ExtractionStatus::Fenced || status == ExtractionStatus::BareCode ||
         status == ExtractionStatus::Unterminated;
}

struct ExtractionResult {
  ExtractionStatus status = ExtractionStatus::Empty;
  std::optional<std::string> code;  // present and non-empty iff has_code(status)
  std::vector<std::string> diagnostics;
};

// Pulls a C snippet out of raw model output.
//
// Closed ``` fences win, first non-blank body first. Blank bodies (doubled
// fences such as "``````" or "```c\n```c") are skipped. A fence left open
// yields everything after its opening line as Unterminated. Without usable
// fences the text counts as BareCode if a line starts with #include or
// mentions `int main`, Empty if blank, Refusal otherwise. The language tag
// on a fence is reported in diagnostics and otherwise ignored.
ExtractionResult extract_code(std::string_view response_text);

}  // namespace slt
