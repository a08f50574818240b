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


#include "risopt/optimizer.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "risopt/hermitian.hpp"

namespace risopt {

namespace {

using Clock = std::chrono::steady_clock;

class SolverFailure : public Error {
 public:
  using Error::Error;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// An MM step needs a feasible point whose surrogate is no worse than at the
// expansion point, not an optimal one. A subproblem whose primal converged
// but whose dual certificate did not may still supply such a step.
bool feasible_ascent(const conic::SolveReport& rep, const SurrogateBundle& bundle, const CMatrix& center) {
  const CMatrix& phi = rep.phi_star;
  if (phi.rows() != center.rows() || !phi.allFinite()) return false;
  if (phi.diagonal().real().maxCoeff() > 1.0 + 1e-8) return false;
  const RVector x = hermitian::pack(phi);
  for (const auto& g : bundle.guards)
    if (g(x) < 0.0) return false;
  return std::isfinite(rep.objective_value) && rep.objective_value >= bundle.evaluate(center);
}

CVector random_phases(Eigen::Index l, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  CVector psi(l);
  for (Eigen::Index i = 0; i < l; ++i) psi(i) = std::polar(1.0, u(rng));
  return psi;
}

CVector project(CVector psi) {
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) /= std::max(1.0, std::abs(psi(i)));
  return psi;
}

OptimizeOutcome sco_run(const SystemModel& sys, const SurrogateModel& model, const FblrParams& params,
                        const ScoSettings& settings, InitMode mode, Rng& init_rng, Rng& rand_rng,
                        bool last_attempt) {
  OptimizeOutcome out;
  const Eigen::Index l = sys.num_ris();
  CVector psi0 = mode == InitMode::all_ones ? CVector(CVector::Ones(l)) : random_phases(l, init_rng);

  ExpansionPoint exp;
  for (int attempt = 0;; ++attempt) {
    try {
      exp = make_expansion(model, psi0 * psi0.adjoint());
      break;
    } catch (const DegenerateExpansion&) {
      if (attempt >= 20) throw;
      out.events.push_back("degenerate start, redrawing phases");
      psi0 = random_phases(l, init_rng);
    }
  }
  CMatrix phi = exp.phi;
  double prev = relaxed_wsr(model, phi);
  out.relaxed_trace.push_back(prev);

  const conic::InteriorPointBackend backend;
  for (int k = 1; k <= settings.max_iters; ++k) {
    const auto t0 = Clock::now();
    const SurrogateBundle bundle = build_bundle(model, exp, settings.guard_rel);
    const RVector center = hermitian::pack(phi);
    const conic::RisSubproblem sub = conic::build_subproblem(bundle, &center);
    const conic::SolveReport rep = conic::solve(sub, bundle, backend, settings.ipm);
    if (rep.status == conic::SolveStatus::infeasible)
      throw SolverFailure("subproblem " + std::to_string(k) + ": " + conic::to_string(rep.status));
    if (rep.status == conic::SolveStatus::numerical_failure) {
      const std::string what = "subproblem " + std::to_string(k) + ": " + conic::to_string(rep.status);
      // A failure on the first attempt usually means the trajectory is heading
      // into a degenerate region, so a fresh start is preferred; only the last
      // attempt falls back to an uncertified step or stops where it is.
      if (!last_attempt) throw SolverFailure(what);
      if (!feasible_ascent(rep, bundle, phi)) {
        if (k == 1) throw SolverFailure(what);
        out.events.push_back(what + ", no ascent, stopping");
        break;
      }
      out.events.push_back(what + ", feasible ascent step taken");
    }
    phi = rep.phi_star;
    const double val = relaxed_wsr(model, phi);
    out.iteration_time_s.push_back(seconds_since(t0));
    out.relaxed_trace.push_back(val);
    out.iters_used = k;
    const double drop = (prev - val) / std::max(std::abs(prev), 1e-300);
    if (drop > 1e-6) {
      out.events.push_back("iteration " + std::to_string(k) + ": objective decreased by " + std::to_string(drop));
      if (drop > 1e-4) throw Error("SCO ascent violated beyond solver tolerance");
    }
    try {
      exp = make_expansion(model, phi);
    } catch (const DegenerateExpansion&) {
      out.events.push_back("degenerate expansion point, stopping");
      break;
    }
    const bool done = std::abs(val - prev) <= settings.rel_tol * std::max(std::abs(prev), 1e-300);
    prev = val;
    if (done) break;
  }
  out.rate_trace = out.relaxed_trace;
  out.psi_star = gaussian_randomize(phi, sys, params, settings.randomization_samples, rand_rng);
  out.evaluations = settings.randomization_samples + 1;
  return out;
}

}  // namespace

void ScoSettings::validate() const {
  if (max_iters < 1) throw Error("ScoSettings: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw Error("ScoSettings: rel_tol must be > 0");
  if (randomization_samples < 1) throw Error("ScoSettings: randomization_samples must be >= 1");
}

bool WsrScore::better_than(const WsrScore& other) const {
  if (clamped != other.clamped) return clamped > other.clamped;
  return unclamped > other.unclamped;
}

WsrScore score_mrc(const SystemModel& sys, const FblrParams& params, const CVector& psi) {
  const auto rho = sinr_mrc(sys, psi);
  return {wsr(rho, params.penalty, params.weights), wsr_unclamped(rho, params.penalty, params.weights)};
}

OptimizeOutcome sco_optimize(const SystemModel& sys, const FblrParams& params, const ScoSettings& settings) {
  settings.validate();
  const SystemModel ns = normalized(sys);
  const SurrogateModel model = make_surrogate_model(ns, params);
  Rng init_rng = make_stream(settings.seed, 0, StreamPurpose::initialization);
  Rng rand_rng = make_stream(settings.seed, 0, StreamPurpose::optimizer);
  OptimizeOutcome out;
  try {
    out = sco_run(ns, model, params, settings, settings.init_mode, init_rng, rand_rng, false);
  } catch (const SolverFailure& e) {
    out = sco_run(ns, model, params, settings, InitMode::random, init_rng, rand_rng, true);
    out.events.insert(out.events.begin(), std::string("restarted from random phases after: ") + e.what());
  }
  out.wsr_value = score_mrc(sys, params, out.psi_star.psi).clamped;
  return out;
}

RisResponse gaussian_randomize(const CMatrix& phi, const SystemModel& sys, const FblrParams& params, int samples,
                               Rng& rng) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian::symmetrize(phi));
  const RVector& vals = eig.eigenvalues();
  const double tr = std::max(vals.cwiseAbs().sum(), 1e-300);
  if (vals.minCoeff() < -1e-8 * tr) throw Error("gaussian_randomize: relaxed solution is not PSD");
  const CMatrix factor = eig.eigenvectors() * vals.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const Eigen::Index l = phi.rows();

  CVector best = project(std::sqrt(std::max(vals(l - 1), 0.0)) * eig.eigenvectors().col(l - 1));
  WsrScore best_score = score_mrc(sys, params, best);
  for (int s = 0; s < samples; ++s) {
    const CVector cand = project(factor * complex_normal_vector(rng, l));
    const WsrScore sc = score_mrc(sys, params, cand);
    if (sc.better_than(best_score)) {
      best = cand;
      best_score = sc;
    }
  }
  return RisResponse{best};
}

OptimizeOutcome ao_optimize(const SystemModel& sys, const FblrParams& params, const AoSettings& settings) {
  if (settings.grid_points < 2) throw Error("ao_optimize: grid_points must be >= 2");
  if (settings.max_sweeps < 1) throw Error("ao_optimize: max_sweeps must be >= 1");
  OptimizeOutcome out;
  const Eigen::Index l = sys.num_ris();
  std::vector<Complex> grid;
  for (int g = 0; g < settings.grid_points; ++g)
    grid.push_back(std::polar(1.0, 2.0 * kPi * g / settings.grid_points));

  CVector psi = CVector::Ones(l);
  WsrScore cur = score_mrc(sys, params, psi);
  ++out.evaluations;
  out.rate_trace.push_back(cur.clamped);
  out.relaxed_trace.push_back(cur.unclamped);
  for (int sweep = 1; sweep <= settings.max_sweeps; ++sweep) {
    const auto t0 = Clock::now();
    bool changed = false;
    for (Eigen::Index e = 0; e < l; ++e) {
      const Complex keep = psi(e);
      Complex best = keep;
      for (const Complex& g : grid) {
        psi(e) = g;
        const WsrScore sc = score_mrc(sys, params, psi);
        ++out.evaluations;
        if (sc.better_than(cur)) {
          cur = sc;
          best = g;
        }
      }
      psi(e) = best;
      if (best != keep) changed = true;
    }
    out.iteration_time_s.push_back(seconds_since(t0));
    out.rate_trace.push_back(cur.clamped);
    out.relaxed_trace.push_back(cur.unclamped);
    out.iters_used = sweep;
    if (!changed) break;
  }
  out.psi_star = RisResponse{psi};
  out.wsr_value = cur.clamped;
  return out;
}

RisResponse ro_baseline(int num_ris, Rng& rng) { return RisResponse{random_phases(num_ris, rng)}; }

}  // namespace risopt
