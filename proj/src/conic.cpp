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


#include "risopt/conic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "risopt/hermitian.hpp"

namespace risopt::conic {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

class RowWriter {
 public:
  RowWriter(Triplets& trip, std::vector<double>& h) : trip_(trip), h_(h) {}

  // Adds the row  s = scale * coef'phi + sum(aux) + constant.
  void add(const RVector* coef, double scale, std::initializer_list<std::pair<Eigen::Index, double>> aux,
           double constant) {
    const auto r = static_cast<Eigen::Index>(h_.size());
    if (coef != nullptr && scale != 0.0) {
      for (Eigen::Index j = 0; j < coef->size(); ++j) {
        const double v = (*coef)(j);
        if (v != 0.0) trip_.emplace_back(r, j, -scale * v);
      }
    }
    for (const auto& [col, val] : aux) trip_.emplace_back(r, col, -val);
    h_.push_back(constant);
  }

  Eigen::Index rows() const { return static_cast<Eigen::Index>(h_.size()); }
  Triplets& triplets() { return trip_; }
  std::vector<double>& rhs() { return h_; }

 private:
  Triplets& trip_;
  std::vector<double>& h_;
};

}  // namespace

RisSubproblem build_subproblem(const SurrogateBundle& bundle, const RVector* center) {
  const Eigen::Index l = bundle.num_ris;
  const Eigen::Index np = hermitian::param_count(l);
  RisSubproblem sub;
  sub.num_ris = static_cast<int>(l);
  sub.num_phi_vars = np;
  sub.constant = bundle.constant + bundle.linear.offset;

  const Eigen::Index n_sqrt = static_cast<Eigen::Index>(bundle.sqrt_terms.size());
  const Eigen::Index n_qol = static_cast<Eigen::Index>(bundle.qol_terms.size());
  const Eigen::Index n_quad = static_cast<Eigen::Index>(bundle.quad_terms.size());
  const Eigen::Index n = np + n_sqrt + n_qol + n_quad;
  const Eigen::Index u0 = np, t0 = np + n_sqrt, q0 = np + n_sqrt + n_qol;

  ConeProgram& prog = sub.program;
  prog.c = RVector::Zero(n);
  if (bundle.linear.coef.size() == np) prog.c.head(np) = -bundle.linear.coef;
  for (Eigen::Index k = 0; k < n_sqrt; ++k) prog.c(u0 + k) = -bundle.sqrt_terms[static_cast<size_t>(k)].weight;
  for (Eigen::Index k = 0; k < n_qol; ++k) prog.c(t0 + k) = bundle.qol_terms[static_cast<size_t>(k)].weight;
  for (Eigen::Index k = 0; k < n_quad; ++k) prog.c(q0 + k) = bundle.quad_terms[static_cast<size_t>(k)].weight;

  Triplets trip;
  std::vector<double> h;
  RowWriter w(trip, h);

  // Orthant: 1 - Phi_ll >= 0, guards >= 0.
  for (Eigen::Index d = 0; d < l; ++d) w.add(nullptr, 0.0, {{d, -1.0}}, 1.0);
  for (const auto& g : bundle.guards) w.add(&g.coef, 1.0, {}, g.offset);
  sub.diag_rows = static_cast<int>(l);
  sub.guard_rows = static_cast<int>(bundle.guards.size());
  prog.dims.nonneg = static_cast<int>(l + static_cast<Eigen::Index>(bundle.guards.size()));

  // Each cone below is a rotated cone p q >= ||r||^2 written as
  // ||(p/g - g q, 2r)|| <= p/g + g q. Any g > 0 is exact; picking g so both
  // factors are equal at the center keeps the iterates away from the
  // cancellation that large per-sensor gains otherwise cause. Factors with a
  // unit partner are only balanced upwards, since an argument near zero at
  // the center would otherwise blow up the rows.
  auto balance = [&](double p, double q) {
    if (center == nullptr || !(p > 0.0) || !(q > 0.0)) return 1.0;
    return std::clamp(std::sqrt(p / q), 1e-6, 1e6);
  };
  auto at = [&](const AffineForm& f) { return center != nullptr ? f(*center) : 0.0; };

  // u <= sqrt(a)  <=>  ||(2u, a/g - g)|| <= a/g + g
  for (Eigen::Index k = 0; k < n_sqrt; ++k) {
    const auto& t = bundle.sqrt_terms[static_cast<size_t>(k)];
    const double g = balance(std::max(at(t.arg), 1.0), 1.0);
    w.add(&t.arg.coef, 1.0 / g, {}, t.arg.offset / g + g);
    w.add(nullptr, 0.0, {{u0 + k, 2.0}}, 0.0);
    w.add(&t.arg.coef, 1.0 / g, {}, t.arg.offset / g - g);
    prog.dims.soc.push_back(3);
  }
  // sum(n^2)/d <= t  <=>  ||(g t - d/g, 2n)|| <= g t + d/g
  for (Eigen::Index k = 0; k < n_qol; ++k) {
    const auto& t = bundle.qol_terms[static_cast<size_t>(k)];
    const double d = at(t.den);
    double nn = 0.0;
    for (const auto& num : t.num) nn += std::pow(at(num), 2);
    const double g = d > 0.0 ? balance(d * d, nn) : 1.0;
    w.add(&t.den.coef, 1.0 / g, {{t0 + k, g}}, t.den.offset / g);
    w.add(&t.den.coef, -1.0 / g, {{t0 + k, g}}, -t.den.offset / g);
    for (const auto& num : t.num) w.add(&num.coef, 2.0, {}, 2.0 * num.offset);
    prog.dims.soc.push_back(2 + static_cast<int>(t.num.size()));
  }
  // lin + sum(sq^2) <= tau  <=>  ||(v/g - g, 2 sq)|| <= v/g + g, v = tau - lin
  for (Eigen::Index k = 0; k < n_quad; ++k) {
    const auto& t = bundle.quad_terms[static_cast<size_t>(k)];
    double ss = 0.0;
    for (const auto& sq : t.squares) ss += std::pow(at(sq), 2);
    const double g = balance(std::max(ss, 1.0), 1.0);
    w.add(&t.linear.coef, -1.0 / g, {{q0 + k, 1.0 / g}}, g - t.linear.offset / g);
    w.add(&t.linear.coef, -1.0 / g, {{q0 + k, 1.0 / g}}, -g - t.linear.offset / g);
    for (const auto& sq : t.squares) w.add(&sq.coef, 2.0, {}, 2.0 * sq.offset);
    prog.dims.soc.push_back(2 + static_cast<int>(t.squares.size()));
  }

  // [[X, -Y], [Y, X]] >= 0, column-major 2L x 2L.
  const Eigen::Index off = w.rows();
  const Eigen::Index p = 2 * l;
  auto put = [&](Eigen::Index r, Eigen::Index c, Eigen::Index col, double v) {
    trip.emplace_back(off + r + c * p, col, -v);
  };
  for (Eigen::Index d = 0; d < l; ++d) {
    put(d, d, d, 1.0);
    put(d + l, d + l, d, 1.0);
  }
  const double ir2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index a = 0; a < l; ++a) {
    for (Eigen::Index b = a + 1; b < l; ++b) {
      const Eigen::Index re = hermitian::offdiag_index(a, b, l);
      const Eigen::Index im = re + 1;
      put(a, b, re, ir2);
      put(b, a, re, ir2);
      put(a + l, b + l, re, ir2);
      put(b + l, a + l, re, ir2);
      put(a + l, b, im, ir2);
      put(b + l, a, im, -ir2);
      put(a, b + l, im, -ir2);
      put(b, a + l, im, ir2);
    }
  }
  h.resize(static_cast<size_t>(off + p * p), 0.0);
  prog.dims.psd.push_back(static_cast<int>(p));

  prog.h = Eigen::Map<const RVector>(h.data(), static_cast<Eigen::Index>(h.size()));
  prog.G = Eigen::SparseMatrix<double>(prog.h.size(), n);
  prog.G.setFromTriplets(trip.begin(), trip.end());
  return sub;
}

SolveReport solve(const RisSubproblem& sub, const SurrogateBundle& bundle, const ConicBackend& backend,
                  const IpmOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  IpmResult res = backend.solve(sub.program, options);
  int iters = res.iterations;
  if (res.status == SolveStatus::numerical_failure) {
    IpmOptions relaxed = options;
    relaxed.feastol = options.near_feastol;
    relaxed.reltol = options.near_reltol;
    relaxed.max_iters = 2 * options.max_iters;
    IpmResult retry = backend.solve(sub.program, relaxed);
    iters += retry.iterations;
    if (retry.status == SolveStatus::optimal) retry.status = SolveStatus::near_optimal;
    // Two uncertified attempts: keep the one that got further.
    if (retry.status != SolveStatus::numerical_failure || !(res.primal_objective <= retry.primal_objective))
      res = std::move(retry);
  }
  SolveReport rep;
  rep.status = res.status;
  rep.iterations = iters;
  rep.gap = res.gap;
  rep.solver_objective = sub.constant - res.primal_objective;
  if (res.x.size() >= sub.num_phi_vars) {
    CMatrix phi = hermitian::unpack(res.x.head(sub.num_phi_vars), sub.num_ris);
    rep.phi_star = hermitian::clip_psd(phi, 0.0);
    rep.objective_value = bundle.evaluate(rep.phi_star);
  }
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

SolveReport solve(const RisSubproblem& sub, const SurrogateBundle& bundle) {
  return solve(sub, bundle, InteriorPointBackend{});
}

}  // namespace risopt::conic
