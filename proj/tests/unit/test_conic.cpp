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

#include <sstream>

#include "risopt/conic.hpp"
#include "risopt/hermitian.hpp"
#include "test_util.hpp"

using namespace risopt;
using namespace risopt::conic;
using Triplet = Eigen::Triplet<double>;

namespace {

ConeProgram make_program(RVector c, Eigen::Index m, const std::vector<Triplet>& trip, RVector h, ConeDims dims) {
  ConeProgram p;
  p.c = std::move(c);
  p.G = Eigen::SparseMatrix<double>(m, p.c.size());
  p.G.setFromTriplets(trip.begin(), trip.end());
  p.h = std::move(h);
  p.dims = std::move(dims);
  return p;
}

}  // namespace

TEST_CASE("ipm solves a small LP") {
  // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0  -> (1.6, 1.2)
  std::vector<Triplet> t = {{0, 0, 1}, {0, 1, 2}, {1, 0, 3}, {1, 1, 1}, {2, 0, -1}, {3, 1, -1}};
  ConeDims d;
  d.nonneg = 4;
  auto p = make_program(RVector::Constant(2, -1.0), 4, t, (RVector(4) << 4, 6, 0, 0).finished(), d);
  const auto r = solve_interior_point(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == Catch::Approx(1.6).margin(1e-7));
  CHECK(r.x(1) == Catch::Approx(1.2).margin(1e-7));
  CHECK(r.gap <= 1e-6 * (1 + std::abs(r.primal_objective)));
}

TEST_CASE("ipm is insensitive to row and column scaling") {
  // Same LP as above with row 0 scaled by 1e6 and y = 1e-5 y'.
  std::vector<Triplet> t = {{0, 0, 1e6}, {0, 1, 2e1}, {1, 0, 3}, {1, 1, 1e-5}, {2, 0, -1}, {3, 1, -1e-5}};
  ConeDims d;
  d.nonneg = 4;
  auto p = make_program((RVector(2) << -1.0, -1e-5).finished(), 4, t, (RVector(4) << 4e6, 6, 0, 0).finished(), d);
  const auto r = solve_interior_point(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == Catch::Approx(1.6).epsilon(1e-7));
  CHECK(r.x(1) == Catch::Approx(1.2e5).epsilon(1e-7));
  // Multipliers of the unscaled problem are (0.4, 0.2); row 0's scales by 1e-6.
  CHECK(r.z(0) == Catch::Approx(0.4e-6).epsilon(1e-6));
  CHECK(r.z(1) == Catch::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("ipm solves a second-order cone program") {
  // min x0 + x1 s.t. ||(x0, x1)|| <= 1 -> -1/sqrt2 each
  std::vector<Triplet> t = {{1, 0, -1}, {2, 1, -1}};
  ConeDims d;
  d.soc = {3};
  auto p = make_program(RVector::Ones(2), 3, t, (RVector(3) << 1, 0, 0).finished(), d);
  const auto r = solve_interior_point(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x(0) == Catch::Approx(-1 / std::sqrt(2.0)).margin(1e-7));
  CHECK(r.primal_objective == Catch::Approx(-std::sqrt(2.0)).margin(1e-7));
}

TEST_CASE("ipm solves a small SDP") {
  // min tr(C X) over X = [[a, b], [b, c]] >= 0, tr X = 1: lambda_min(C)
  RMatrix C(2, 2);
  C << 2, 1, 1, 3;
  // variables a, b, c; equality via two inequalities
  std::vector<Triplet> t = {{0, 0, 1}, {0, 2, 1}, {1, 0, -1}, {1, 2, -1}};
  // PSD rows 2..5 column-major: s = [a b; b c]
  t.push_back({2, 0, -1});
  t.push_back({3, 1, -1});
  t.push_back({4, 1, -1});
  t.push_back({5, 2, -1});
  ConeDims d;
  d.nonneg = 2;
  d.psd = {2};
  RVector c(3);
  c << 2, 2, 3;
  auto p = make_program(c, 6, t, (RVector(6) << 1, -1, 0, 0, 0, 0).finished(), d);
  const auto r = solve_interior_point(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.primal_objective == Catch::Approx(2.5 - std::sqrt(1.25)).margin(1e-7));
}

TEST_CASE("ipm reports infeasibility") {
  // x <= -1 and x >= 0
  std::vector<Triplet> t = {{0, 0, 1}, {1, 0, -1}};
  ConeDims d;
  d.nonneg = 2;
  auto p = make_program(RVector::Ones(1), 2, t, (RVector(2) << -1, 0).finished(), d);
  CHECK(solve_interior_point(p).status == SolveStatus::infeasible);
}

TEST_CASE("triplet dump round-trips") {
  std::vector<Triplet> t = {{0, 0, 1.5}, {1, 1, -2.25}, {2, 0, 0.1}};
  ConeDims d;
  d.nonneg = 1;
  d.soc = {2};
  auto p = make_program(RVector::Ones(2), 3, t, RVector::Ones(3), d);
  std::stringstream ss;
  write_triplets(p, ss);
  const ConeProgram q = read_triplets(ss);
  CHECK(q.dims.soc == p.dims.soc);
  CHECK(q.dims.nonneg == 1);
  CHECK(RMatrix(q.G).isApprox(RMatrix(p.G)));
  CHECK(q.h == p.h);
}

TEST_CASE("max trace under unit diagonal gives the identity") {
  for (int l : {1, 3, 5}) {
    SurrogateBundle b;
    b.num_ris = l;
    const CMatrix eye = CMatrix::Identity(l, l);
    b.linear = AffineForm{hermitian::trace_gradient(eye), 0.0};
    const auto sub = build_subproblem(b);
    const auto rep = solve(sub, b);
    REQUIRE(rep.status == SolveStatus::optimal);
    CHECK((rep.phi_star - eye).norm() <= 1e-6);
    CHECK(rep.objective_value == Catch::Approx(l).epsilon(1e-7));
  }
}

TEST_CASE("hermitian embedding round-trips exactly") {
  Rng rng(3);
  for (int l : {1, 2, 5}) {
    const CMatrix h = testutil::random_hermitian(rng, l);
    CHECK(hermitian::extract(hermitian::embed(h)) == h);
    CHECK((hermitian::unpack(hermitian::pack(h), l) - h).norm() <= 1e-14 * h.norm());
  }
}

TEST_CASE("trace gradient matches real trace") {
  Rng rng(4);
  const int l = 4;
  const CMatrix a = testutil::random_cmatrix(rng, l, l);
  const CMatrix phi = testutil::random_hermitian(rng, l);
  CHECK(hermitian::trace_gradient(a).dot(hermitian::pack(phi)) ==
        Catch::Approx(trace_product(a, phi).real()).epsilon(1e-12));
}
