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

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "slt/prompt.hpp"

namespace slt {

enum class OptAlgorithm { StopwordPrune, PunctuationPrune, EntropyPrune, SynonymReplace };

inline constexpr OptAlgorithm kAllAlgorithms[] = {
    OptAlgorithm::StopwordPrune, OptAlgorithm::PunctuationPrune, OptAlgorithm::EntropyPrune,
    OptAlgorithm::SynonymReplace};

std::string_view to_string(OptAlgorithm algorithm);

/// Throws ConfigError for names outside the closed set.
OptAlgorithm parse_algorithm(std::string_view name);

struct OptPlan {
  std::vector<OptAlgorithm> algorithms;  // 1 or 2, no duplicates
  bool optimize_system_prompt = false;
  std::uint64_t seed = 0;

  bool operator==(const OptPlan&) const = default;
};

void validate(const OptPlan& plan);

struct Lexicon {
  std::set<std::string> stopwords;
  std::map<std::string, std::vector<std::string>> synonyms;
  std::map<std::string, double> unigram_freq;
};

void validate(const Lexicon& lexicon);

/// Words whose surprisal -log2(freq) is below this are dropped by EntropyPrune.
inline constexpr double kEntropyThresholdBits = 6.0;

struct LexiconPaths {
  std::filesystem::path stopwords;   // one word per line
  std::filesystem::path thesaurus;   // word<TAB>syn1,syn2,...
  std::filesystem::path frequencies; // word<TAB>float

  /// The three files shipped under `<data_dir>/lexicon/`.
  static LexiconPaths bundled(const std::filesystem::path& data_dir);
};

/// Loads and validates the three lexicon files. Throws ConfigError.
Lexicon load_lexicon(const LexiconPaths& paths);

// Backtick spans and the [INST]/[/INST]/<<SYS>>/<</SYS>> markers pass
// through every algorithm untouched. Words are matched case-insensitively
// after stripping surrounding punctuation.
std::string optimize_text(std::string_view text, OptAlgorithm algorithm, const Lexicon& lexicon,
                          std::uint64_t seed);

/// Applies the plan's algorithms in order to user_text (and to system_text
/// when the plan says so). Examples and template are carried over.
PromptSpec apply_plan(const PromptSpec& spec, const OptPlan& plan, const Lexicon& lexicon);

}  // namespace slt
