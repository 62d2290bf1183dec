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

#include "slt/snippet_extractor.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "slt/errors.hpp"

namespace slt {
namespace {

constexpr std::string_view kFence = "```";

// Tags recognized at the start of a single-line fence such as "```c int x;```".
constexpr std::array<std::string_view, 16> kInlineTags = {
    "c", "C", "h", "cpp", "c++", "cc", "cxx", "asm", "assembly", "nasm", "x86asm",
    "riscv", "s", "sh", "bash", "text"};

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }

bool is_blank(std::string_view s) { return std::all_of(s.begin(), s.end(), is_space); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

struct Fence {
  std::size_t open_pos = 0;
  std::size_t end_pos = 0;  // one past the closing run (or end of text)
  std::string tag;
  std::string body;
  bool closed = true;
};

std::size_t run_length(std::string_view text, std::size_t pos) {
  std::size_t n = 0;
  while (pos + n < text.size() && text[pos + n] == '`') ++n;
  return n;
}

std::size_t line_end(std::string_view text, std::size_t pos) {
  const std::size_t e = text.find('\n', pos);
  return e == std::string_view::npos ? text.size() : e;
}

std::vector<Fence> scan_fences(std::string_view text) {
  std::vector<Fence> fences;
  std::size_t pos = 0;
  bool inside = false;
  Fence current;
  std::size_t body_start = 0;

  auto open_at = [&](std::size_t open_pos, std::string_view tag, std::size_t eol) {
    current = Fence{};
    current.open_pos = open_pos;
    current.tag = std::string(tag);
    body_start = std::min(eol + 1, text.size());
    pos = body_start;
    inside = true;
  };

  while (pos < text.size()) {
    const std::size_t f = text.find(kFence, pos);
    if (!inside) {
      if (f == std::string_view::npos) break;
      const std::size_t len = run_length(text, f);
      if (len >= 6) {
        fences.push_back(Fence{f, f + len, {}, {}, true});
        pos = f + len;
        continue;
      }
      const std::size_t eol = line_end(text, f);
      const std::string_view tail = text.substr(f + len, eol - f - len);
      if (const std::size_t t = tail.find(kFence); t != std::string_view::npos) {
        std::string_view body = tail.substr(0, t);
        std::string tag;
        const std::string_view lead = body.substr(0, std::min(body.size(), body.find_first_of(" \t")));
        if (lead.size() < body.size() &&
            std::find(kInlineTags.begin(), kInlineTags.end(), lead) != kInlineTags.end()) {
          tag = std::string(lead);
          body.remove_prefix(lead.size());
        }
        const std::size_t close = f + len + t;
        fences.push_back(Fence{f, close + run_length(text, close), tag, std::string(trim(body)), true});
        pos = fences.back().end_pos;
        continue;
      }
      open_at(f, trim(tail), eol);
      continue;
    }

    // Inside an open fence.
    if (f == std::string_view::npos) break;
    const std::size_t nl = text.rfind('\n', f);
    const std::size_t ls = (nl == std::string_view::npos || nl + 1 < body_start) ? body_start : nl + 1;
    const bool fence_starts_line = is_blank(text.substr(ls, f - ls));
    const std::size_t body_end = fence_starts_line ? (ls > body_start ? ls - 1 : body_start) : f;
    const std::size_t len = run_length(text, f);
    const std::size_t eol = line_end(text, f);
    const std::string_view tail = trim(text.substr(f + len, eol - f - len));
    current.body = std::string(text.substr(body_start, body_end - body_start));
    current.end_pos = f + len;
    fences.push_back(current);
    inside = false;
    if (fence_starts_line && !tail.empty() && tail.find('`') == std::string_view::npos) {
      // "```c" where a closing fence was expected: the model reopened.
      open_at(f, tail, eol);
    } else {
      pos = f + len;
    }
  }
  if (inside) {
    current.body = std::string(rtrim(text.substr(body_start)));
    current.end_pos = text.size();
    current.closed = false;
    fences.push_back(current);
  }
  return fences;
}

ExtractionResult classify_unfenced(std::string_view text) {
  ExtractionResult r;
  bool looks_like_code = false;
  for (std::size_t pos = 0; pos <= text.size();) {
    const std::size_t eol = line_end(text, pos);
    const std::string_view line = text.substr(pos, eol - pos);
    if (trim(line).starts_with("#include") || line.find("int main") != std::string_view::npos) {
      looks_like_code = true;
      break;
    }
    pos = eol + 1;
  }
  if (looks_like_code) {
    r.status = ExtractionStatus::BareCode;
    r.code = std::string(trim(text));
    r.diagnostics.emplace_back("no code fence; accepted bare code");
  } else if (is_blank(text)) {
    r.status = ExtractionStatus::Empty;
  } else {
    r.status = ExtractionStatus::Refusal;
    r.diagnostics.emplace_back(std::string(trim(text)));
  }
  return r;
}

}  // namespace

std::string_view to_string(ExtractionStatus status) {
  switch (status) {
    case ExtractionStatus::Fenced: return "fenced";
    case ExtractionStatus::BareCode: return "bare_code";
    case ExtractionStatus::Unterminated: return "unterminated";
    case ExtractionStatus::Refusal: return "refusal";
    case ExtractionStatus::Empty: return "empty";
  }
  return "empty";
}

ExtractionStatus parse_extraction_status(std::string_view name) {
  for (auto s : {ExtractionStatus::Fenced, ExtractionStatus::BareCode, ExtractionStatus::Unterminated,
                 ExtractionStatus::Refusal, ExtractionStatus::Empty}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown extraction status '" + std::string(name) + "'");
}

namespace {

ExtractionResult extract_lf(std::string_view response_text) {
  const std::vector<Fence> fences = scan_fences(response_text);
  if (fences.empty()) return classify_unfenced(response_text);

  std::size_t skipped = 0;
  const Fence* unterminated = nullptr;
  for (const Fence& fence : fences) {
    if (!fence.closed) {
      unterminated = &fence;
      continue;
    }
    if (is_blank(fence.body)) {
      ++skipped;
      continue;
    }
    ExtractionResult r;
    r.status = ExtractionStatus::Fenced;
    r.code = fence.body;
    if (!fence.tag.empty()) r.diagnostics.push_back("fence language: " + fence.tag);
    if (skipped > 0) r.diagnostics.push_back("skipped " + std::to_string(skipped) + " empty fence(s)");
    return r;
  }
  if (unterminated != nullptr && !is_blank(unterminated->body)) {
    ExtractionResult r;
    r.status = ExtractionStatus::Unterminated;
    r.code = unterminated->body;
    r.diagnostics.emplace_back("unterminated fence");
    if (!unterminated->tag.empty()) r.diagnostics.push_back("fence language: " + unterminated->tag);
    return r;
  }

  // Only empty fences: judge whatever prose surrounds them.
  std::string residual;
  std::size_t pos = 0;
  for (const Fence& fence : fences) {
    if (fence.open_pos > pos) residual.append(response_text.substr(pos, fence.open_pos - pos));
    pos = std::max(pos, fence.end_pos);
  }
  residual.append(response_text.substr(std::min(pos, response_text.size())));
  ExtractionResult r = classify_unfenced(residual);
  r.diagnostics.insert(r.diagnostics.begin(), "all fences empty");
  return r;
}

}  // namespace

ExtractionResult extract_code(std::string_view response_text) {
  if (response_text.find("\r\n") == std::string_view::npos) return extract_lf(response_text);
  std::string lf;
  lf.reserve(response_text.size());
  for (std::size_t i = 0; i < response_text.size(); ++i) {
    if (response_text[i] == '\r' && i + 1 < response_text.size() && response_text[i + 1] == '\n') continue;
    lf += response_text[i];
  }
  return extract_lf(lf);
}

}  // namespace slt
