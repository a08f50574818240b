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

#include <algorithm>
#include <cmath>
#include <random>

#include "risopt/fblr.hpp"
#include "risopt/rng.hpp"
#include "risopt/types.hpp"

namespace testutil {

using namespace risopt;

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

inline CMatrix random_cmatrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  CMatrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = complex_normal(rng);
  return m;
}

inline CMatrix random_hermitian(Rng& rng, Eigen::Index l) {
  const CMatrix a = random_cmatrix(rng, l, l);
  return 0.5 * (a + a.adjoint());
}

inline CVector random_phase_vector(Rng& rng, Eigen::Index l) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  CVector v(l);
  for (Eigen::Index i = 0; i < l; ++i) v(i) = std::polar(1.0, u(rng));
  return v;
}

// PSD with max diagonal entry drawn below 1.
inline CMatrix random_feasible_phi(Rng& rng, Eigen::Index l) {
  std::uniform_int_distribution<int> rank_d(1, static_cast<int>(l));
  const int rank = rank_d(rng);
  const CMatrix f = random_cmatrix(rng, l, rank);
  CMatrix phi = f * f.adjoint();
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const double top = phi.diagonal().real().maxCoeff();
  return phi * (u(rng) / top);
}

// Random uplink with SNR-like scaling so SINRs are O(1..100).
inline SystemModel random_system(Rng& rng, int m, int k, int l, double gain = 1.0, double err = 0.1) {
  SystemModel sys;
  std::uniform_real_distribution<double> p(0.3, 1.0);
  for (int i = 0; i < m; ++i) {
    sys.channels.push_back(gain * random_cmatrix(rng, k, l));
    sys.power.push_back(p(rng));
  }
  const CMatrix a = random_cmatrix(rng, k, k);
  sys.c_tilde = err * (a * a.adjoint() / k);
  sys.noise_var = 1.0;
  return sys;
}

inline FblrParams random_params(Rng& rng, int m) {
  FblrParams p;
  std::uniform_real_distribution<double> w(0.5, 1.5);
  for (int i = 0; i < m; ++i) {
    p.weights.push_back(w(rng));
    p.penalty.push_back(penalty_coeff(100, 1e-3));
  }
  return p;
}

}  // namespace testutil
