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
#include <string>
#include <string_view>

namespace slt {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

/// 64-bit FNV-1a over the raw bytes of `data`.
constexpr std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = kFnvOffsetBasis;
  for (char ch : data) {
    h ^= static_cast<std::uint8_t>(ch);
    h *= kFnvPrime;
  }
  return h;
}

/// Fixed-width (16 digit) lowercase hex.
std::string to_hex(std::uint64_t value);

/// Inverse of to_hex; throws std::invalid_argument on anything but 16 hex digits.
std::uint64_t from_hex(std::string_view text);

/// Content hash used for snippet ids and prompt hashes.
inline std::string content_id(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace slt
