// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "risopt/types.hpp"

namespace risopt {

using Rng = std::mt19937_64;

/// Purpose tags for substream derivation. Values are part of the
/// reproducibility contract; do not renumber.
enum class StreamPurpose : std::uint64_t {
  placement = 1,
  ris_cn = 2,
  sensor_ris = 3,
  pilot = 4,
  optimizer = 5,
  random_phase = 6,
  initialization = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic seed for the substream (realization, purpose, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t realization,
                                 StreamPurpose purpose, std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ realization);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return splitmix64(h ^ index);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t realization,
                       StreamPurpose purpose, std::uint64_t index = 0) {
  return Rng(derive_seed(master, realization, purpose, index));
}

/// Circularly-symmetric CN(0,1) sample: (x + jy)/sqrt(2).
inline Complex complex_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return Complex(re, im) * std::sqrt(0.5);
}

inline CVector complex_normal_vector(Rng& rng, Eigen::Index size) {
  CVector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = complex_normal(rng);
  return v;
}

}  // namespace risopt
