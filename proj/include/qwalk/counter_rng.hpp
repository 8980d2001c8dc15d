// Copyright 2026 The qwalk Authors
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

#ifndef QWALK_COUNTER_RNG_HPP
#define QWALK_COUNTER_RNG_HPP

#include <cstdint>

#include "qwalk/types.hpp"

namespace qwalk {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: every draw is a pure function of its coordinates, so
/// trajectories do not depend on evaluation order.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(splitmix64(seed)) {}

  constexpr std::uint64_t bits(std::uint64_t trajectory, std::uint64_t step, std::uint64_t site) const {
    std::uint64_t h = splitmix64(seed_ ^ trajectory);
    h = splitmix64(h ^ step);
    return splitmix64(h ^ site);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t trajectory, std::uint64_t step, std::uint64_t site) const {
    return static_cast<double>(bits(trajectory, step, site) >> 11) * 0x1.0p-53;
  }

  static constexpr std::uint64_t site_hash(const Offset& x) {
    std::uint64_t h = 0x51ed270b27e0f2a1ULL;
    for (auto c : x.c) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
    return h;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace qwalk

#endif  // QWALK_COUNTER_RNG_HPP
