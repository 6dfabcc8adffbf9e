// Copyright 2026 The pvqflow Authors
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
#include <initializer_list>
#include <string_view>

namespace pvq {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based hash of a key tuple. The same tuple always yields the same
/// word, so values can be drawn in any order (or in parallel) reproducibly.
constexpr std::uint64_t hash_counter(std::initializer_list<std::uint64_t> key) noexcept {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (std::uint64_t k : key) h = mix64(h ^ mix64(k));
  return h;
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Per-stage seed: the stage name is hashed and mixed into the run seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) noexcept {
  return mix64(seed ^ fnv1a64(stage));
}

/// Rademacher sign (+1 or -1) for the given key.
inline double rademacher(std::initializer_list<std::uint64_t> key) noexcept {
  return (hash_counter(key) >> 63) ? 1.0 : -1.0;
}

}  // namespace pvq
