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
#include <stdexcept>
#include <string>

namespace slt {

// Raised when a PromptSpec (or its JSON form) violates an invariant.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad configuration values: unknown algorithm names, out-of-range sampling
// parameters, malformed config documents.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class BoundsViolation : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class OrderingViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptLog : public std::runtime_error {
 public:
  CorruptLog(std::uint64_t seq, const std::string& what)
      : std::runtime_error("corrupt log at seq " + std::to_string(seq) + ": " + what), seq_(seq) {}

  // Sequence number of the first record that failed the integrity scan.
  std::uint64_t seq() const noexcept { return seq_; }

 private:
  std::uint64_t seq_;
};

}  // namespace slt
