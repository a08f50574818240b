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


#include "risopt/surrogate.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "risopt/hermitian.hpp"

namespace risopt {

namespace {

const double kLn2 = std::log(2.0);
const double kDegenerate = 1e-14;

double rtrace(const CMatrix& a, const CMatrix& phi) { return trace_product(a, phi).real(); }

CMatrix psd_sqrt(const CMatrix& c) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian::symmetrize(c));
  RVector vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().adjoint();
}

AffineForm affine(const RVector& coef, double offset = 0.0) { return AffineForm{coef, offset}; }

RVector real_trace(const CMatrix& a) { return hermitian::trace_gradient(a); }
RVector imag_trace(const CMatrix& a) { return hermitian::trace_gradient(Complex(0.0, -1.0) * a); }

}  // namespace

SurrogateModel make_surrogate_model(const SystemModel& sys, const FblrParams& params) {
  return make_surrogate_model(sys, params, sys.num_antennas() == 1 ? BoundForm::single : BoundForm::multi);
}

SurrogateModel make_surrogate_model(const SystemModel& sys, const FblrParams& params, BoundForm form) {
  const int m = sys.num_sensors();
  if (static_cast<int>(params.weights.size()) != m || static_cast<int>(params.penalty.size()) != m)
    throw Error("surrogate model: weights and penalties must match the sensor count");
  if (form == BoundForm::single && sys.num_antennas() != 1)
    throw Error("surrogate model: single-antenna bounds need K = 1");
  SurrogateModel model;
  model.form = form;
  model.num_ris = sys.num_ris();
  model.params = params;
  model.lifted = lift(sys);
  const Eigen::Index l = sys.num_ris();
  if (form == BoundForm::single) {
    const double c = sys.c_tilde(0, 0).real();
    std::vector<CMatrix> outer;
    for (int j = 0; j < m; ++j) {
      const CMatrix& h = sys.channels[static_cast<size_t>(j)];
      outer.push_back(sys.power[static_cast<size_t>(j)] * (h.adjoint() * h));
    }
    for (int i = 0; i < m; ++i) {
      CMatrix tilde = c * CMatrix::Identity(l, l);
      for (int j = 0; j < m; ++j)
        if (j != i) tilde += outer[static_cast<size_t>(j)];
      model.pi.push_back(outer[static_cast<size_t>(i)]);
      model.pi_bar.push_back(outer[static_cast<size_t>(i)] + tilde);
      model.pi_tilde.push_back(std::move(tilde));
    }
  } else {
    const CMatrix root = psd_sqrt(sys.c_tilde);
    for (const auto& h : sys.channels) model.err_factor.push_back(root * h);
  }
  return model;
}

double relaxed_sinr(const SurrogateModel& model, int sensor, const CMatrix& phi) {
  const auto i = static_cast<size_t>(sensor);
  if (model.form == BoundForm::single) {
    const double x = rtrace(model.pi[i], phi);
    const double y = model.noise_var() + rtrace(model.pi_tilde[i], phi);
    return y > 0.0 ? x / y : 0.0;
  }
  return sinr_lifted_multi(model.lifted, sensor, phi).sinr();
}

std::vector<double> relaxed_sinr(const SurrogateModel& model, const CMatrix& phi) {
  std::vector<double> rho;
  for (int i = 0; i < model.num_sensors(); ++i) rho.push_back(relaxed_sinr(model, i, phi));
  return rho;
}

double relaxed_wsr(const SurrogateModel& model, const CMatrix& phi) {
  const auto rho = relaxed_sinr(model, phi);
  return wsr_unclamped(rho, model.params.penalty, model.params.weights);
}

double t_total(const LiftedSystem& sys, int sensor, const CMatrix& phi) {
  return sinr_lifted_multi(sys, sensor, phi).total();
}

CMatrix t_gradient(const LiftedSystem& sys, int sensor, const CMatrix& phi) {
  const auto i = static_cast<size_t>(sensor);
  const CMatrix& xi = sys.xi[i][i];
  const Complex t = trace_product(xi, phi);
  CMatrix g = (2.0 * sys.power[i] * t + sys.noise_var) * xi.adjoint();
  g += (phi * sys.lambda[i] + sys.lambda[i] * phi).adjoint();
  for (size_t j = 0; j < sys.xi.size(); ++j) {
    if (j == i) continue;
    g += 2.0 * sys.power[j] * trace_product(sys.xi[i][j], phi) * sys.xi[i][j].adjoint();
  }
  return g;
}

ExpansionPoint make_expansion(const SurrogateModel& model, const CMatrix& phi) {
  const int m = model.num_sensors();
  ExpansionPoint exp;
  exp.phi = phi;
  exp.form = model.form;
  const double tr_phi = phi.trace().real();
  if (!(tr_phi > 0.0)) throw DegenerateExpansion("expansion point has zero trace");
  for (int i = 0; i < m; ++i) {
    const auto k = static_cast<size_t>(i);
    double rho = 0.0;
    if (model.form == BoundForm::single) {
      const double x = rtrace(model.pi[k], phi);
      const double y = model.noise_var() + rtrace(model.pi_tilde[k], phi);
      const double scale = model.pi[k].trace().real() * tr_phi;
      if (!(x > kDegenerate * scale) || !(y > 0.0)) throw DegenerateExpansion("signal trace vanishes at expansion point");
      exp.x.push_back(x);
      exp.y.push_back(y);
      exp.s.push_back(x + y);
      rho = x / y;
    } else {
      const SinrParts parts = sinr_lifted_multi(model.lifted, i, phi);
      const double t = rtrace(model.lifted.xi[k][k], phi);
      const double scale = model.lifted.xi[k][k].trace().real() * tr_phi;
      if (!(t > kDegenerate * scale) || !(parts.total() > 0.0))
        throw DegenerateExpansion("signal trace vanishes at expansion point");
      exp.t_xi.push_back(t);
      exp.t_total.push_back(parts.total());
      exp.t_grad.push_back(t_gradient(model.lifted, i, phi));
      rho = parts.sinr();
    }
    const double d = dispersion(rho);
    if (!(d > 0.0)) throw DegenerateExpansion("dispersion vanishes at expansion point");
    exp.rho.push_back(rho);
    exp.cap.push_back(capacity(rho));
    exp.disp.push_back(d);
  }
  return exp;
}

double t_tilde(const ExpansionPoint& exp, int sensor, const CMatrix& phi) {
  const auto i = static_cast<size_t>(sensor);
  const CMatrix delta = phi - exp.phi;
  return exp.t_total[i] + (delta.adjoint() * exp.t_grad[i]).trace().real();
}

double capacity_lb_single(const SurrogateModel& model, const ExpansionPoint& exp, int sensor,
                          const CMatrix& phi) {
  const auto i = static_cast<size_t>(sensor);
  const double x = rtrace(model.pi[i], phi);
  const double s = model.noise_var() + rtrace(model.pi_bar[i], phi);
  const double gamma = 2.0 * std::sqrt(std::max(x, 0.0) / exp.x[i]) - s / exp.s[i];
  return exp.cap[i] + exp.rho[i] / kLn2 * (gamma - 1.0);
}

double dispersion_ub_single(const SurrogateModel& model, const ExpansionPoint& exp, int sensor,
                            const CMatrix& phi) {
  const auto i = static_cast<size_t>(sensor);
  const double x = rtrace(model.pi[i], phi);
  const double s = model.noise_var() + rtrace(model.pi_bar[i], phi);
  return 0.5 * exp.disp[i] + 0.5 * (exp.x[i] + x * x / exp.x[i]) / (exp.disp[i] * s);
}

double capacity_lb_multi(const SurrogateModel& model, const ExpansionPoint& exp, int sensor,
                         const CMatrix& phi) {
  const auto i = static_cast<size_t>(sensor);
  const double t = rtrace(model.lifted.xi[i][i], phi);
  const double total = t_total(model.lifted, sensor, phi);
  const double gamma = 2.0 * t / exp.t_xi[i] - total / exp.t_total[i];
  return exp.cap[i] + exp.rho[i] * (gamma - 1.0) / kLn2;
}

double dispersion_ub_multi(const SurrogateModel& model, const ExpansionPoint& exp, int sensor,
                           const CMatrix& phi) {
  const auto i = static_cast<size_t>(sensor);
  const double tt = t_tilde(exp, sensor, phi);
  if (!(tt > 0.0)) return std::numeric_limits<double>::infinity();
  const double t = rtrace(model.lifted.xi[i][i], phi);
  const double signal = model.lifted.power[i] * t * t;
  return 0.5 * exp.disp[i] + signal / (exp.disp[i] * tt);
}

double capacity_lb(const SurrogateModel& model, const ExpansionPoint& exp, int sensor, const CMatrix& phi) {
  return model.form == BoundForm::single ? capacity_lb_single(model, exp, sensor, phi)
                                         : capacity_lb_multi(model, exp, sensor, phi);
}

double dispersion_ub(const SurrogateModel& model, const ExpansionPoint& exp, int sensor, const CMatrix& phi) {
  return model.form == BoundForm::single ? dispersion_ub_single(model, exp, sensor, phi)
                                         : dispersion_ub_multi(model, exp, sensor, phi);
}

double surrogate_wsr(const SurrogateModel& model, const ExpansionPoint& exp, const CMatrix& phi) {
  double total = 0.0;
  for (int i = 0; i < model.num_sensors(); ++i) {
    const auto k = static_cast<size_t>(i);
    const double w = model.params.weights[k];
    if (w == 0.0) continue;
    total += w * (capacity_lb(model, exp, i, phi) - model.params.penalty[k] * dispersion_ub(model, exp, i, phi));
  }
  return total;
}

double SurrogateBundle::evaluate(const CMatrix& phi) const { return evaluate_packed(hermitian::pack(phi)); }

double SurrogateBundle::evaluate_packed(const RVector& x) const {
  double v = constant + linear(x);
  for (const auto& t : sqrt_terms) v += t.weight * std::sqrt(std::max(t.arg(x), 0.0));
  for (const auto& t : qol_terms) {
    const double den = t.den(x);
    double num = 0.0;
    for (const auto& n : t.num) num += n(x) * n(x);
    if (!(den > 0.0)) return -std::numeric_limits<double>::infinity();
    v -= t.weight * num / den;
  }
  for (const auto& t : quad_terms) {
    double q = t.linear(x);
    for (const auto& s : t.squares) q += s(x) * s(x);
    v -= t.weight * q;
  }
  return v;
}

SurrogateBundle build_bundle(const SurrogateModel& model, const ExpansionPoint& exp, double guard_rel) {
  const Eigen::Index l = model.num_ris;
  const Eigen::Index n = hermitian::param_count(l);
  SurrogateBundle b;
  b.num_ris = static_cast<int>(l);
  b.linear = affine(RVector::Zero(n));
  const double s2 = model.noise_var();
  for (int i = 0; i < model.num_sensors(); ++i) {
    const auto k = static_cast<size_t>(i);
    const double w = model.params.weights[k];
    if (w == 0.0) continue;
    const double a = model.params.penalty[k];
    const double rho = exp.rho[k];
    const double dbar = exp.disp[k];
    if (model.form == BoundForm::single) {
      const double xb = exp.x[k];
      const double sb = exp.s[k];
      b.constant += w * (exp.cap[k] - rho / kLn2 - 0.5 * a * dbar);
      // - w rho/ln2 * s / s_bar
      const RVector spi = real_trace(model.pi_bar[k]);
      b.linear.coef -= (w * rho / kLn2 / sb) * spi;
      b.constant -= w * rho / kLn2 * s2 / sb;
      const RVector xpi = real_trace(model.pi[k]) / xb;
      b.sqrt_terms.push_back({2.0 * w * rho / kLn2, affine(xpi)});
      QuadOverLinTerm q;
      q.weight = 0.5 * w * a / dbar;
      q.num.push_back(affine(RVector::Zero(n), 1.0));
      q.num.push_back(affine(xpi));
      q.den = affine(spi / xb, s2 / xb);
      b.qol_terms.push_back(std::move(q));
    } else {
      const LiftedSystem& sys = model.lifted;
      const double tb = exp.t_xi[k];
      const double Tb = exp.t_total[k];
      const double p = sys.power[k];
      b.constant += w * (exp.cap[k] - rho / kLn2 - 0.5 * a * dbar);
      const RVector txi = real_trace(sys.xi[k][k]);
      b.linear.coef += (w * rho / kLn2 * 2.0 / tb) * txi;

      QuadTerm quad;
      quad.weight = w * rho / kLn2;
      quad.linear = affine((s2 / Tb) * txi);
      quad.squares.push_back(affine(std::sqrt(p / Tb) * txi));
      const CMatrix& bf = model.err_factor[k];
      const double ib = 1.0 / std::sqrt(Tb);
      for (Eigen::Index r = 0; r < bf.rows(); ++r) {
        for (Eigen::Index c = 0; c < l; ++c) {
          CMatrix sel = CMatrix::Zero(l, l);
          sel.row(c) = bf.row(r);
          if (sel.cwiseAbs().maxCoeff() == 0.0) continue;
          quad.squares.push_back(affine(ib * real_trace(sel)));
          quad.squares.push_back(affine(ib * imag_trace(sel)));
        }
      }
      for (size_t j = 0; j < sys.xi.size(); ++j) {
        if (j == k) continue;
        const double f = std::sqrt(sys.power[j] / Tb);
        quad.squares.push_back(affine(f * real_trace(sys.xi[k][j])));
        quad.squares.push_back(affine(f * imag_trace(sys.xi[k][j])));
      }
      b.quad_terms.push_back(std::move(quad));

      // T~ / T_bar, affine
      const RVector g = real_trace(exp.t_grad[k]);
      const double g0 = hermitian::pack(exp.phi).dot(g);
      AffineForm den = affine(g / Tb, (Tb - g0) / Tb);
      QuadOverLinTerm q;
      q.weight = w * a / dbar;
      q.num.push_back(affine(std::sqrt(p / Tb) * txi));
      q.den = den;
      b.qol_terms.push_back(std::move(q));
      den.offset -= guard_rel;
      b.guards.push_back(std::move(den));
    }
  }
  return b;
}

}  // namespace risopt
