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

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "risopt/hermitian.hpp"
#include "risopt/optimizer.hpp"
#include "test_util.hpp"

using namespace risopt;
using testutil::rel_err;

namespace {

FblrParams equal_params(int m) {
  FblrParams p;
  p.weights.assign(static_cast<size_t>(m), 1.0);
  p.penalty.assign(static_cast<size_t>(m), penalty_coeff(100, 1e-3));
  return p;
}

double brute_force_l2(const SystemModel& sys, const FblrParams& params) {
  // psi = (lam1, lam2 e^{j phi}); a common phase is irrelevant
  const int g = 64;
  double best = 0.0;
  CVector psi(2);
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b)
      for (int c = 0; c < g; ++c) {
        psi(0) = (a + 1.0) / g;
        psi(1) = std::polar((b + 1.0) / g, 2.0 * kPi * c / g);
        best = std::max(best, score_mrc(sys, params, psi).clamped);
      }
  return best;
}

}  // namespace

TEST_CASE("settings are validated") {
  ScoSettings s;
  CHECK_NOTHROW(s.validate());
  s.max_iters = 0;
  CHECK_THROWS(s.validate());
  s = {};
  s.rel_tol = 0.0;
  CHECK_THROWS(s.validate());
  s = {};
  s.randomization_samples = 0;
  CHECK_THROWS(s.validate());
}

TEST_CASE("SCO relaxed objective never decreases") {
  Rng rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    const auto sys = testutil::random_system(rng, 3, 2, 4);
    ScoSettings s;
    s.max_iters = 15;
    const auto out = sco_optimize(sys, testutil::random_params(rng, 3), s);
    REQUIRE(out.relaxed_trace.size() == static_cast<size_t>(out.iters_used) + 1);
    for (size_t k = 1; k < out.relaxed_trace.size(); ++k) {
      CHECK(out.relaxed_trace[k] >= out.relaxed_trace[k - 1] - 1e-6 * std::abs(out.relaxed_trace[k - 1]));
    }
    CHECK(out.psi_star.feasible(1e-12));
    CHECK(out.iteration_time_s.size() == static_cast<size_t>(out.iters_used));
  }
}

TEST_CASE("single-antenna path also ascends") {
  Rng rng(42);
  const auto sys = testutil::random_system(rng, 3, 1, 4);
  ScoSettings s;
  s.max_iters = 15;
  const auto out = sco_optimize(sys, testutil::random_params(rng, 3), s);
  for (size_t k = 1; k < out.relaxed_trace.size(); ++k) {
    CHECK(out.relaxed_trace[k] >= out.relaxed_trace[k - 1] - 1e-6 * std::abs(out.relaxed_trace[k - 1]));
  }
}

TEST_CASE("SCO matches a brute-force grid on a two-element surface") {
  Rng rng(43);
  for (int trial = 0; trial < 3; ++trial) {
    auto sys = testutil::random_system(rng, 1, 1, 2, 1.0, 0.0);
    sys.c_tilde.setZero();
    const auto params = equal_params(1);
    const auto out = sco_optimize(sys, params, ScoSettings{});
    const double grid = brute_force_l2(sys, params);
    CHECK(out.wsr_value >= 0.98 * grid);
  }
}

TEST_CASE("SCO is deterministic for a fixed seed") {
  Rng rng(44);
  const auto sys = testutil::random_system(rng, 3, 2, 4);
  const auto params = testutil::random_params(rng, 3);
  ScoSettings s;
  s.max_iters = 5;
  s.seed = 9;
  const auto a = sco_optimize(sys, params, s);
  const auto b = sco_optimize(sys, params, s);
  CHECK(a.psi_star.psi == b.psi_star.psi);
  CHECK(a.relaxed_trace == b.relaxed_trace);
  CHECK(a.wsr_value == b.wsr_value);
}

TEST_CASE("randomization recovers a rank-one matrix exactly") {
  Rng rng(45);
  const auto sys = testutil::random_system(rng, 3, 2, 5);
  const auto params = testutil::random_params(rng, 3);
  const CVector psi = 0.9 * testutil::random_phase_vector(rng, 5);
  const CMatrix phi = psi * psi.adjoint();
  const auto model = make_surrogate_model(sys, params);
  const double relaxed = wsr(relaxed_sinr(model, phi), params.penalty, params.weights);
  Rng r0(1);
  const auto eig_only = gaussian_randomize(phi, sys, params, 0, r0);
  CHECK(rel_err(score_mrc(sys, params, eig_only.psi).clamped, relaxed) < 1e-6);
  CHECK(std::abs(std::abs(eig_only.psi.dot(psi)) - psi.squaredNorm()) < 1e-9);
}

TEST_CASE("randomization returns the best projected candidate") {
  Rng rng(46);
  const auto sys = testutil::random_system(rng, 3, 2, 4);
  const auto params = testutil::random_params(rng, 3);
  const CMatrix phi = testutil::random_feasible_phi(rng, 4);
  Rng r1(77), r2(77);
  const auto best = gaussian_randomize(phi, sys, params, 100, r1);
  CHECK(best.feasible(1e-12));
  const WsrScore got = score_mrc(sys, params, best.psi);
  // replay the draws
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian::symmetrize(phi));
  const CMatrix factor = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  for (int s = 0; s < 100; ++s) {
    CVector c = factor * complex_normal_vector(r2, 4);
    for (Eigen::Index i = 0; i < 4; ++i) c(i) /= std::max(1.0, std::abs(c(i)));
    CHECK(c.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    CHECK_FALSE(score_mrc(sys, params, c).better_than(got));
  }
  CMatrix bad = phi;
  bad(0, 0) = -1.0;
  CHECK_THROWS(gaussian_randomize(bad, sys, params, 10, r1));
}

TEST_CASE("candidate ranking is lexicographic") {
  CHECK(WsrScore{1.0, -5.0}.better_than(WsrScore{0.5, 3.0}));
  CHECK(WsrScore{0.0, -1.0}.better_than(WsrScore{0.0, -2.0}));
  CHECK_FALSE(WsrScore{0.0, -2.0}.better_than(WsrScore{0.0, -2.0}));
}

TEST_CASE("AO is monotone and counts its evaluations") {
  Rng rng(47);
  const auto sys = testutil::random_system(rng, 4, 2, 6);
  const auto params = testutil::random_params(rng, 4);
  AoSettings s;
  s.grid_points = 16;
  s.max_sweeps = 5;
  const auto out = ao_optimize(sys, params, s);
  for (size_t k = 1; k < out.rate_trace.size(); ++k) {
    const WsrScore now{out.rate_trace[k], out.relaxed_trace[k]};
    const WsrScore before{out.rate_trace[k - 1], out.relaxed_trace[k - 1]};
    CHECK_FALSE(before.better_than(now));
  }
  CHECK(out.evaluations == 1 + static_cast<long long>(out.iters_used) * 6 * 16);
  CHECK((out.psi_star.psi.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(out.wsr_value == score_mrc(sys, params, out.psi_star.psi).clamped);
  CHECK_THROWS(ao_optimize(sys, params, AoSettings{1, 5}));
}

TEST_CASE("AO on a single element matches a fine phase scan") {
  Rng rng(48);
  const auto sys = testutil::random_system(rng, 1, 2, 1);
  const auto params = equal_params(1);
  const auto out = ao_optimize(sys, params, AoSettings{360, 20});
  double scan = 0.0;
  for (int g = 0; g < 3600; ++g) {
    CVector psi(1);
    psi(0) = std::polar(1.0, 2.0 * kPi * g / 3600.0);
    scan = std::max(scan, score_mrc(sys, params, psi).clamped);
  }
  CHECK(out.wsr_value >= scan - 1e-9 * std::max(1.0, scan));
}

TEST_CASE("random phases are uniform unit-modulus and seeded") {
  Rng rng(49);
  const auto psi = ro_baseline(10000, rng).psi;
  CHECK((psi.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
  std::vector<double> u;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    double p = std::arg(psi(i));
    if (p < 0) p += 2.0 * kPi;
    u.push_back(p / (2.0 * kPi));
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  const double n = static_cast<double>(u.size());
  for (size_t i = 0; i < u.size(); ++i) ks = std::max({ks, (i + 1) / n - u[i], u[i] - i / n});
  CHECK(ks < 0.05);
  Rng a(5), b(5);
  CHECK(ro_baseline(16, a).psi == ro_baseline(16, b).psi);
}
