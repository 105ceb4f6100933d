// Copyright 2026 The jurybench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>
#include <cstddef>
#include <iterator>
#include <ranges>

namespace jurybench {

/// SplitMix64 finalizer (Steele, Lea, Flood). A bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` under `base`. Fixed forever: reports and replay
/// fixtures depend on it.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ mix64(index + 0x9E3779B97F4A7C15ULL));
}

/// SplitMix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

/// Unbiased draw from [0, bound) by multiply-and-reject (Lemire 2019).
/// Spelled out instead of std::uniform_int_distribution, whose output differs
/// between standard libraries.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  unsigned __int128 wide = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(wide);
  if (low < bound) {
    const std::uint64_t floor = (0 - bound) % bound;
    while (low < floor) {
      wide = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(wide);
    }
  }
  return static_cast<std::uint64_t>(wide >> 64);
}

/// Fisher-Yates, last position first.
template <std::ranges::random_access_range R, class Rng>
  requires std::ranges::sized_range<R>
void seeded_shuffle(R&& items, Rng& rng) {
  auto first = std::ranges::begin(items);
  for (auto i = static_cast<std::uint64_t>(std::ranges::size(items)); i > 1; --i) {
    const auto j = static_cast<std::ptrdiff_t>(uniform_below(rng, i));
    std::ranges::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + j);
  }
}

}  // namespace jurybench
