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

#include <cmath>

#include "risopt/conic.hpp"
#include "risopt/hermitian.hpp"
#include "risopt/surrogate.hpp"
#include "test_util.hpp"

using namespace risopt;
using testutil::rel_err;

namespace {

struct Case {
  SystemModel sys;
  FblrParams params;
  SurrogateModel model;
};

Case make_case(Rng& rng, int m, int k, int l) {
  Case c;
  c.sys = testutil::random_system(rng, m, k, l, 1.0, 0.2);
  c.params = testutil::random_params(rng, m);
  c.model = make_surrogate_model(c.sys, c.params);
  return c;
}

double true_capacity(const SurrogateModel& model, int i, const CMatrix& phi) {
  return capacity(relaxed_sinr(model, i, phi));
}

double true_dispersion(const SurrogateModel& model, int i, const CMatrix& phi) {
  return dispersion(relaxed_sinr(model, i, phi));
}

template <class F>
double central_diff(F f, const CMatrix& phi, const CMatrix& dir, double h) {
  return (f(phi + h * dir) - f(phi - h * dir)) / (2.0 * h);
}

}  // namespace

TEST_CASE("bounds are tight at the expansion point") {
  Rng rng(31);
  for (int k : {1, 3}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto c = make_case(rng, 3, k, 4);
      const CMatrix phi0 = testutil::random_feasible_phi(rng, 4);
      const auto exp = make_expansion(c.model, phi0);
      for (int i = 0; i < 3; ++i) {
        CHECK(rel_err(capacity_lb(c.model, exp, i, phi0), true_capacity(c.model, i, phi0)) < 1e-9);
        CHECK(rel_err(dispersion_ub(c.model, exp, i, phi0), true_dispersion(c.model, i, phi0)) < 1e-9);
      }
      CHECK(rel_err(surrogate_wsr(c.model, exp, phi0), relaxed_wsr(c.model, phi0)) < 1e-9);
      if (k > 1) {
        for (int i = 0; i < 3; ++i) CHECK(rel_err(t_tilde(exp, i, phi0), t_total(c.model.lifted, i, phi0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("capacity bound stays below and dispersion bound above") {
  Rng rng(32);
  for (int k : {1, 2}) {
    const auto c = make_case(rng, 3, k, 4);
    const auto exp = make_expansion(c.model, testutil::random_feasible_phi(rng, 4));
    for (int trial = 0; trial < 1000; ++trial) {
      const CMatrix phi = testutil::random_feasible_phi(rng, 4);
      for (int i = 0; i < 3; ++i) {
        CHECK(capacity_lb(c.model, exp, i, phi) <= true_capacity(c.model, i, phi) + 1e-9);
        if (k == 1 || t_tilde(exp, i, phi) > 0.0) {
          CHECK(dispersion_ub(c.model, exp, i, phi) >= true_dispersion(c.model, i, phi) - 1e-9);
        }
      }
      if (k == 1) CHECK(surrogate_wsr(c.model, exp, phi) <= relaxed_wsr(c.model, phi) + 1e-9);
    }
  }
}

TEST_CASE("total power is a convex function with the stated gradient") {
  Rng rng(33);
  const auto c = make_case(rng, 3, 3, 4);
  const auto& sys = c.model.lifted;
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix phi = testutil::random_feasible_phi(rng, 4);
    const CMatrix dir = testutil::random_hermitian(rng, 4);
    for (int i = 0; i < 3; ++i) {
      const auto f = [&](const CMatrix& x) { return t_total(sys, i, x); };
      const double fd = central_diff(f, phi, dir, 1e-4);
      const double an = (dir.adjoint() * t_gradient(sys, i, phi)).trace().real();
      CHECK(rel_err(fd, an) <= 1e-5);
    }
  }
  CHECK(t_total(sys, 0, CMatrix::Zero(4, 4)) == 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix a = testutil::random_feasible_phi(rng, 4), b = testutil::random_feasible_phi(rng, 4);
    for (int i = 0; i < 3; ++i) {
      CHECK(t_total(sys, i, 0.5 * (a + b)) <= 0.5 * (t_total(sys, i, a) + t_total(sys, i, b)) + 1e-12);
    }
  }
}

TEST_CASE("linearized total power is affine") {
  Rng rng(34);
  const auto c = make_case(rng, 2, 2, 4);
  const auto exp = make_expansion(c.model, testutil::random_feasible_phi(rng, 4));
  const CMatrix a = testutil::random_feasible_phi(rng, 4), b = testutil::random_feasible_phi(rng, 4);
  const double w = 0.3;
  for (int i = 0; i < 2; ++i) {
    const double mixed = t_tilde(exp, i, w * a + (1 - w) * b);
    const double blend = w * t_tilde(exp, i, a) + (1 - w) * t_tilde(exp, i, b);
    CHECK(std::abs(mixed - blend) <= 1e-12 * std::max(1.0, std::abs(blend)));
  }
}

TEST_CASE("bounds are tangent to the true functions") {
  Rng rng(35);
  for (int k : {1, 2}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto c = make_case(rng, 3, k, 4);
      const CMatrix phi0 = testutil::random_feasible_phi(rng, 4);
      const auto exp = make_expansion(c.model, phi0);
      const CMatrix dir = testutil::random_hermitian(rng, 4);
      const double h = 1e-5 * phi0.norm() / dir.norm();
      for (int i = 0; i < 3; ++i) {
        const double gs = central_diff([&](const CMatrix& x) { return capacity_lb(c.model, exp, i, x); }, phi0, dir, h);
        const double gt = central_diff([&](const CMatrix& x) { return true_capacity(c.model, i, x); }, phi0, dir, h);
        CHECK(rel_err(gs, gt) <= 1e-4);
        const double ds = central_diff([&](const CMatrix& x) { return dispersion_ub(c.model, exp, i, x); }, phi0, dir, h);
        const double dt = central_diff([&](const CMatrix& x) { return true_dispersion(c.model, i, x); }, phi0, dir, h);
        CHECK(rel_err(ds, dt) <= 1e-4);
      }
    }
  }
}

TEST_CASE("single and multi forms agree at a single-antenna expansion point") {
  Rng rng(36);
  auto sys = testutil::random_system(rng, 1, 1, 4);
  sys.c_tilde.setZero();
  const auto params = testutil::random_params(rng, 1);
  const auto single = make_surrogate_model(sys, params, BoundForm::single);
  const auto multi = make_surrogate_model(sys, params, BoundForm::multi);
  const CMatrix phi0 = testutil::random_feasible_phi(rng, 4);
  const auto es = make_expansion(single, phi0), em = make_expansion(multi, phi0);
  CHECK(rel_err(es.rho[0], em.rho[0]) < 1e-12);
  CHECK(rel_err(capacity_lb(single, es, 0, phi0), capacity_lb(multi, em, 0, phi0)) < 1e-12);
  for (int trial = 0; trial < 200; ++trial) {
    const CMatrix phi = testutil::random_feasible_phi(rng, 4);
    const double c = true_capacity(single, 0, phi);
    CHECK(capacity_lb(single, es, 0, phi) <= c + 1e-9);
    CHECK(capacity_lb(multi, em, 0, phi) <= c + 1e-9);
  }
  CHECK_THROWS(make_surrogate_model(testutil::random_system(rng, 1, 2, 4), params, BoundForm::single));
}

TEST_CASE("zero weights give a zero surrogate") {
  Rng rng(37);
  auto c = make_case(rng, 3, 2, 4);
  std::fill(c.params.weights.begin(), c.params.weights.end(), 0.0);
  c.model = make_surrogate_model(c.sys, c.params);
  const CMatrix phi0 = testutil::random_feasible_phi(rng, 4);
  const auto exp = make_expansion(c.model, phi0);
  CHECK(surrogate_wsr(c.model, exp, testutil::random_feasible_phi(rng, 4)) == 0.0);
  const auto b = build_bundle(c.model, exp);
  CHECK(b.term_count() == 0);
  CHECK(b.evaluate(testutil::random_feasible_phi(rng, 4)) == 0.0);
}

TEST_CASE("zero signal channel is a degenerate expansion") {
  Rng rng(38);
  for (int k : {1, 2}) {
    auto sys = testutil::random_system(rng, 2, k, 4);
    sys.channels[1].setZero();
    const auto model = make_surrogate_model(sys, testutil::random_params(rng, 2));
    CHECK_THROWS_AS(make_expansion(model, CMatrix::Identity(4, 4)), DegenerateExpansion);
  }
  const auto c = make_case(rng, 2, 2, 4);
  CHECK_THROWS_AS(make_expansion(c.model, CMatrix::Zero(4, 4)), DegenerateExpansion);
}

TEST_CASE("coefficient bundle reproduces the surrogate evaluators") {
  Rng rng(39);
  for (int k : {1, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto c = make_case(rng, 3, k, 4);
      const auto exp = make_expansion(c.model, testutil::random_feasible_phi(rng, 4));
      const auto b = build_bundle(c.model, exp);
      CHECK(b.term_count() == (k == 1 ? 6u : 6u));
      CHECK(b.guards.size() == (k == 1 ? 0u : 3u));
      for (int s = 0; s < 50; ++s) {
        const CMatrix phi = testutil::random_feasible_phi(rng, 4);
        bool guarded = true;
        for (int i = 0; i < 3 && k > 1; ++i) guarded = guarded && t_tilde(exp, i, phi) > 0.0;
        if (!guarded) continue;
        CHECK(rel_err(b.evaluate(phi), surrogate_wsr(c.model, exp, phi)) < 1e-9);
      }
    }
  }
}

TEST_CASE("subproblem optimum does not depend on the balancing center") {
  Rng rng(41);
  for (int k : {1, 2}) {
    for (int trial = 0; trial < 3; ++trial) {
      auto c = make_case(rng, 3, k, 4);
      // One strong sensor puts the cone data several orders of magnitude apart.
      c.sys.channels[0] *= 300.0;
      c.model = make_surrogate_model(normalized(c.sys), c.params);
      const CMatrix phi0 = testutil::random_feasible_phi(rng, 4);
      const auto exp = make_expansion(c.model, phi0);
      const auto b = build_bundle(c.model, exp);
      const RVector center = hermitian::pack(phi0);
      const auto plain_sub = conic::build_subproblem(b);
      const auto plain = conic::solve(plain_sub, b);
      const auto balanced = conic::solve(conic::build_subproblem(b, &center), b);
      REQUIRE(plain.status != conic::SolveStatus::numerical_failure);
      REQUIRE(balanced.status != conic::SolveStatus::numerical_failure);
      // Certified accuracy is relative to the conic objective c'x, which
      // carries the large cancelling terms of the high-SINR minorant.
      const double scale = 1.0 + std::abs(plain_sub.constant - plain.solver_objective);
      const double tol = 2e-6 * scale;
      CHECK(std::abs(plain.objective_value - balanced.objective_value) <= tol);
      // The expansion point is feasible, so the optimum cannot fall below it.
      CHECK(balanced.objective_value >= b.evaluate(phi0) - tol);
    }
  }
}
