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

#include "slt/prompt_optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "slt/errors.hpp"
#include "slt/random.hpp"

namespace slt {
namespace {

constexpr std::string_view kProtectedMarkers[] = {"[INST]", "[/INST]", "<<SYS>>", "<</SYS>>"};

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }
bool is_punct(char ch) { return std::ispunct(static_cast<unsigned char>(ch)) != 0; }
bool is_alnum(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) != 0; }

// Marks every byte that sits inside a matched backtick span or a prompt
// marker. A run of N backticks is closed by the next run of exactly N.
std::vector<bool> protected_mask(std::string_view text) {
  std::vector<bool> mask(text.size(), false);
  struct Run {
    std::size_t pos, len;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '`') {
      std::size_t j = i;
      while (j < text.size() && text[j] == '`') ++j;
      runs.push_back({i, j - i});
      i = j;
    } else {
      ++i;
    }
  }
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::size_t close = r + 1;
    while (close < runs.size() && runs[close].len != runs[r].len) ++close;
    if (close == runs.size()) continue;
    const std::size_t end = runs[close].pos + runs[close].len;
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(runs[r].pos),
              mask.begin() + static_cast<std::ptrdiff_t>(end), true);
    r = close;
  }
  for (std::string_view marker : kProtectedMarkers) {
    for (std::size_t at = text.find(marker); at != std::string_view::npos;
         at = text.find(marker, at + marker.size())) {
      std::fill(mask.begin() + static_cast<std::ptrdiff_t>(at),
                mask.begin() + static_cast<std::ptrdiff_t>(at + marker.size()), true);
    }
  }
  return mask;
}

struct Token {
  std::size_t begin, end;
  std::string separator;  // whitespace preceding the token
  bool is_protected = false;
};

struct Segmented {
  std::string leading;
  std::vector<Token> tokens;
  std::string trailing;
};

Segmented segment(std::string_view text, const std::vector<bool>& mask) {
  Segmented seg;
  std::size_t i = 0;
  std::string pending;
  bool first = true;
  while (i < text.size()) {
    if (is_space(text[i]) && !mask[i]) {
      pending += text[i++];
      continue;
    }
    Token tok{i, i, {}, false};
    while (i < text.size() && !(is_space(text[i]) && !mask[i])) {
      tok.is_protected = tok.is_protected || mask[i];
      ++i;
    }
    tok.end = i;
    if (first) {
      seg.leading = std::move(pending);
      first = false;
    } else {
      tok.separator = std::move(pending);
    }
    pending.clear();
    seg.tokens.push_back(std::move(tok));
  }
  if (first) {
    seg.leading = std::move(pending);
  } else {
    seg.trailing = std::move(pending);
  }
  return seg;
}

// The alphanumeric core of a token, e.g. "(don't," -> "don't".
struct Core {
  std::size_t begin, end;  // relative to the token
};

Core word_core(std::string_view token) {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e && !is_alnum(token[b])) ++b;
  while (e > b && !is_alnum(token[e - 1])) --e;
  return {b, e};
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

// Rebuilds text from the surviving tokens. Between two survivors the
// separator is the one preceding the right-hand token, unless a dropped
// token took a line break with it, in which case the first such break wins.
std::string reassemble(const Segmented& seg, const std::vector<std::optional<std::string>>& kept) {
  std::string out = seg.leading;
  bool any = false;
  std::optional<std::string> line_break;
  for (std::size_t t = 0; t < seg.tokens.size(); ++t) {
    const std::string& sep = seg.tokens[t].separator;
    if (!line_break && sep.find('\n') != std::string::npos) line_break = sep;
    if (!kept[t]) continue;
    if (any) out += line_break ? *line_break : sep;
    out += *kept[t];
    any = true;
    line_break.reset();
  }
  out += seg.trailing;
  return out;
}

std::string strip_punctuation(std::string_view text, const std::vector<bool>& mask,
                              std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!mask[i] && is_punct(text[i])) continue;
    out += text[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(OptAlgorithm algorithm) {
  switch (algorithm) {
    case OptAlgorithm::StopwordPrune: return "StopwordPrune";
    case OptAlgorithm::PunctuationPrune: return "PunctuationPrune";
    case OptAlgorithm::EntropyPrune: return "EntropyPrune";
    case OptAlgorithm::SynonymReplace: return "SynonymReplace";
  }
  return "?";
}

OptAlgorithm parse_algorithm(std::string_view name) {
  for (OptAlgorithm a : kAllAlgorithms) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown prompt optimization algorithm '" + std::string(name) + "'");
}

void validate(const OptPlan& plan) {
  if (plan.algorithms.empty() || plan.algorithms.size() > 2) {
    throw ConfigError("an optimization plan needs one or two algorithms");
  }
  if (plan.algorithms.size() == 2 && plan.algorithms[0] == plan.algorithms[1]) {
    throw ConfigError("duplicate algorithm in optimization plan");
  }
}

void validate(const Lexicon& lexicon) {
  if (lexicon.stopwords.empty()) throw ConfigError("lexicon has no stopwords");
  for (const auto& [word, freq] : lexicon.unigram_freq) {
    if (!(freq > 0.0 && freq <= 1.0)) {
      throw ConfigError("frequency of '" + word + "' is outside (0, 1]");
    }
  }
  for (const auto& [word, syns] : lexicon.synonyms) {
    if (syns.empty()) throw ConfigError("thesaurus entry '" + word + "' has no synonyms");
    for (const std::string& s : syns) {
      if (s.empty() || std::any_of(s.begin(), s.end(), is_space)) {
        throw ConfigError("synonym '" + s + "' of '" + word + "' is not a single word");
      }
    }
  }
}

LexiconPaths LexiconPaths::bundled(const std::filesystem::path& data_dir) {
  const auto dir = data_dir / "lexicon";
  return {dir / "stopwords.txt", dir / "thesaurus.tsv", dir / "unigram_freq.tsv"};
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon file " + path.string());
  return in;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Lexicon load_lexicon(const LexiconPaths& paths) {
  Lexicon lex;
  std::string line;
  {
    auto in = open_or_throw(paths.stopwords);
    while (std::getline(in, line)) {
      std::string w = lowercase(trim(line));
      if (!w.empty()) lex.stopwords.insert(std::move(w));
    }
  }
  {
    auto in = open_or_throw(paths.thesaurus);
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw ConfigError("thesaurus line without tab: " + line);
      std::vector<std::string> syns;
      std::stringstream ss(line.substr(tab + 1));
      std::string syn;
      while (std::getline(ss, syn, ',')) {
        syn = trim(syn);
        if (!syn.empty()) syns.push_back(syn);
      }
      lex.synonyms[lowercase(trim(line.substr(0, tab)))] = std::move(syns);
    }
  }
  {
    auto in = open_or_throw(paths.frequencies);
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw ConfigError("frequency line without tab: " + line);
      double freq = 0.0;
      try {
        freq = std::stod(line.substr(tab + 1));
      } catch (const std::exception&) {
        throw ConfigError("bad frequency value: " + line);
      }
      lex.unigram_freq[lowercase(trim(line.substr(0, tab)))] = freq;
    }
  }
  validate(lex);
  return lex;
}

std::string optimize_text(std::string_view text, OptAlgorithm algorithm, const Lexicon& lexicon,
                          std::uint64_t seed) {
  if (text.empty()) return {};
  const std::vector<bool> mask = protected_mask(text);
  const Segmented seg = segment(text, mask);
  Rng rng(seed);

  std::vector<std::optional<std::string>> kept;
  kept.reserve(seg.tokens.size());
  for (const Token& tok : seg.tokens) {
    const std::string_view raw = text.substr(tok.begin, tok.end - tok.begin);
    if (algorithm == OptAlgorithm::PunctuationPrune) {
      std::string stripped = strip_punctuation(text, mask, tok.begin, tok.end);
      if (stripped.empty()) {
        kept.emplace_back();
      } else {
        kept.emplace_back(std::move(stripped));
      }
      continue;
    }
    if (tok.is_protected) {
      kept.emplace_back(std::string(raw));
      continue;
    }
    const Core core = word_core(raw);
    const std::string word = lowercase(raw.substr(core.begin, core.end - core.begin));
    switch (algorithm) {
      case OptAlgorithm::StopwordPrune:
        if (!word.empty() && lexicon.stopwords.contains(word)) {
          kept.emplace_back();
          continue;
        }
        break;
      case OptAlgorithm::EntropyPrune: {
        const auto it = lexicon.unigram_freq.find(word);
        if (it != lexicon.unigram_freq.end() && -std::log2(it->second) < kEntropyThresholdBits) {
          kept.emplace_back();
          continue;
        }
        break;
      }
      case OptAlgorithm::SynonymReplace: {
        const auto it = lexicon.synonyms.find(word);
        if (it == lexicon.synonyms.end()) break;
        std::string replacement = it->second[rng.index(it->second.size())];
        if (std::isupper(static_cast<unsigned char>(raw[core.begin]))) {
          replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
        }
        std::string out(raw.substr(0, core.begin));
        out += replacement;
        out += raw.substr(core.end);
        kept.emplace_back(std::move(out));
        continue;
      }
      case OptAlgorithm::PunctuationPrune:
        break;
    }
    kept.emplace_back(std::string(raw));
  }
  return reassemble(seg, kept);
}

PromptSpec apply_plan(const PromptSpec& spec, const OptPlan& plan, const Lexicon& lexicon) {
  validate(plan);
  PromptSpec out = spec;
  for (std::size_t i = 0; i < plan.algorithms.size(); ++i) {
    out.user_text = optimize_text(out.user_text, plan.algorithms[i], lexicon, mix_seed(plan.seed, 2 * i));
    if (plan.optimize_system_prompt) {
      out.system_text =
          optimize_text(out.system_text, plan.algorithms[i], lexicon, mix_seed(plan.seed, 2 * i + 1));
    }
  }
  return out;
}

}  // namespace slt
