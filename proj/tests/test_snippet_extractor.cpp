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

#include <random>

#include "doctest.h"
#include "json.hpp"
#include "slt/snippet_extractor.hpp"
#include "test_support.hpp"

using namespace slt;
using slt::testing::fixtures;
using slt::testing::slurp;

namespace {

void check_invariant(const ExtractionResult& r) {
  REQUIRE(r.code.has_value() == has_code(r.status));
  if (r.code) REQUIRE(!r.code->empty());
}

}  // namespace

TEST_SUITE("snippet_extractor") {
  TEST_CASE("documented examples") {
    auto r = extract_code("```c\nint main(){return 0;}\n```");
    CHECK(r.status == ExtractionStatus::Fenced);
    CHECK(r.code == "int main(){return 0;}");

    r = extract_code("``````\n```c\nint x;\n```");
    CHECK(r.status == ExtractionStatus::Fenced);
    CHECK(r.code == "int x;");

    r = extract_code("```c\nint main(){");
    CHECK(r.status == ExtractionStatus::Unterminated);
    CHECK(r.code == "int main(){");

    r = extract_code("#include <stdio.h>\nint main(){return 0;}");
    CHECK(r.status == ExtractionStatus::BareCode);
    CHECK(r.code == "#include <stdio.h>\nint main(){return 0;}");

    r = extract_code("I don't understand the query.");
    CHECK(r.status == ExtractionStatus::Refusal);
    CHECK(!r.code);
    CHECK(!r.diagnostics.empty());

    r = extract_code("");
    CHECK(r.status == ExtractionStatus::Empty);
    CHECK(!r.code);
  }

  TEST_CASE("language tag is reported, not enforced") {
    const auto r = extract_code("```cpp\nint main(){}\n```");
    CHECK(r.status == ExtractionStatus::Fenced);
    bool found = false;
    for (const auto& d : r.diagnostics) found |= d.find("cpp") != std::string::npos;
    CHECK(found);
  }

  TEST_CASE("status names round trip") {
    for (auto s : {ExtractionStatus::Fenced, ExtractionStatus::BareCode, ExtractionStatus::Unterminated,
                   ExtractionStatus::Refusal, ExtractionStatus::Empty}) {
      CHECK(parse_extraction_status(to_string(s)) == s);
    }
  }

  TEST_CASE("checked-in corpus") {
    const auto dir = fixtures() / "extraction";
    const auto manifest = nlohmann::json::parse(slurp(dir / "expected.json"));
    REQUIRE(manifest.size() >= 20);
    for (const auto& item : manifest) {
      const std::string file = item.at("file");
      const auto r = extract_code(slurp(dir / file));
      INFO(file);
      CHECK(to_string(r.status) == item.at("status").get<std::string>());
      if (item.contains("code")) {
        CHECK(r.code == item.at("code").get<std::string>());
      } else {
        CHECK(!r.code);
      }
    }
  }

  TEST_CASE("property: fenced round trip") {
    std::mt19937_64 rng(5);
    static constexpr char kAlphabet[] = "abc xyz{}();=+*/\n\t#<>\"'0123456789_";
    for (int iter = 0; iter < 2000; ++iter) {
      std::string s;
      const std::size_t n = 1 + rng() % 60;
      for (std::size_t i = 0; i < n; ++i) s += kAlphabet[rng() % (sizeof kAlphabet - 1)];
      s += ';';
      // Leading blank lines would be indistinguishable from fence padding.
      if (s.find_first_not_of(" \t\n") != 0) s.insert(0, "x");
      const auto r = extract_code("```c\n" + s + "\n```");
      INFO(s);
      REQUIRE(r.status == ExtractionStatus::Fenced);
      REQUIRE(r.code == s);
    }
  }

  TEST_CASE("property: totality and exclusivity over fence arrangements") {
    std::mt19937_64 rng(11);
    static const char* kPieces[] = {"```", "```c", "``````", "````", "`", "\n", "\n", " ", "int main(){}",
                                    "#include <stdio.h>", "x = 1;", "Sure!", "sorry", "\r\n", "\t", "c",
                                    "```\n", "\n```", "cpp", "}"};
    for (int iter = 0; iter < 20000; ++iter) {
      std::string s;
      const std::size_t n = rng() % 14;
      for (std::size_t i = 0; i < n; ++i) s += kPieces[rng() % std::size(kPieces)];
      ExtractionResult r;
      REQUIRE_NOTHROW(r = extract_code(s));
      check_invariant(r);
    }
  }

  TEST_CASE("property: totality over arbitrary bytes") {
    std::mt19937_64 rng(99);
    for (int iter = 0; iter < 5000; ++iter) {
      std::string s(rng() % 200, '\0');
      for (char& ch : s) ch = static_cast<char>(rng() % 256);
      ExtractionResult r;
      REQUIRE_NOTHROW(r = extract_code(s));
      check_invariant(r);
    }
  }
}
