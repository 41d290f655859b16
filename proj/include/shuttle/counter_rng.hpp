/* Copyright 2026 The Shuttle Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Counter-based random numbers: every lattice site owns a fixed uniform
// variate keyed by (seed, layer, ix, iy). A crystal is therefore the same
// wherever its window is cut, and can be regenerated in any order.

#include <cstdint>

namespace shuttle {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key shared by all sites of one lattice column (fixed layer and ix).
constexpr std::uint64_t column_key(std::uint64_t seed, std::int64_t layer, std::int64_t ix) {
  std::uint64_t key = mix64(seed ^ 0x5851f42d4c957f2dULL);
  key = mix64(key ^ static_cast<std::uint64_t>(layer));
  return mix64(key ^ static_cast<std::uint64_t>(ix));
}

constexpr double uniform_from_key(std::uint64_t column, std::int64_t iy) {
  return static_cast<double>(mix64(column ^ static_cast<std::uint64_t>(iy)) >> 11) * 0x1.0p-53;
}

/// Uniform variate in [0, 1) for a site of the infinite lattice.
constexpr double site_uniform(std::uint64_t seed, std::int64_t layer, std::int64_t ix,
                              std::int64_t iy) {
  return uniform_from_key(column_key(seed, layer, ix), iy);
}

}  // namespace shuttle
