// Copyright 2026 The FeatProp Authors
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

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "featprop/error.hpp"

namespace featprop::rng {

// All randomness in the library flows through Stream. The generator is
// std::mt19937_64, whose state transition and seeding are fixed by the C++
// standard, and the mappings from raw 64-bit draws to bounded integers and
// unit doubles are spelled out below instead of delegating to the
// implementation-defined <random> distributions. Integer-derived draws
// (masks, shuffles, index sampling) therefore reproduce bit-for-bit across
// platforms and standard libraries; Gaussian draws additionally depend on
// libm's log/cos/sqrt.

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent sub-seed from a base seed and a stream tag.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) noexcept {
  return splitmix64(splitmix64(seed) ^ (tag + 0x9E3779B97F4A7C15ULL));
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Unbiased integer in [0, bound) via rejection sampling.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) {
      throw Error(ErrorCategory::Parameter, "rng: bound must be positive");
    }
    // 2^64 mod bound; draws >= 2^64 - rem are rejected.
    const std::uint64_t rem =
        (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (rem == 0 || x < 0ULL - rem) return x % bound;
    }
  }

  /// Double in [0, 1) with 53 random mantissa bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Double in [low, high).
  double next_uniform(double low, double high) {
    double v = low + (high - low) * next_unit();
    if (v >= high) v = std::nextafter(high, low);
    return v;
  }

  /// Standard normal via Box-Muller; consumes exactly two raw draws.
  double next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Fisher-Yates shuffle of [first, first + n).
  template <typename T>
  void shuffle(T* first, std::size_t n) {
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace featprop::rng
