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


#include "risopt/fblr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

namespace risopt {

SystemModel normalized(const SystemModel& sys) {
  const double pmax = *std::max_element(sys.power.begin(), sys.power.end());
  if (!(pmax > 0.0) || !(sys.noise_var > 0.0)) throw Error("normalized: needs positive power and noise");
  // (P, s2, C~) / pmax, then channels / c with c^2 = s2 / pmax.
  const double c2 = sys.noise_var / pmax;
  const double c = std::sqrt(c2);
  SystemModel out;
  out.noise_var = 1.0;
  out.power.reserve(sys.power.size());
  for (double p : sys.power) out.power.push_back(p / pmax);
  out.c_tilde = sys.c_tilde / (pmax * c2);
  for (const auto& h : sys.channels) out.channels.push_back(h / c);
  return out;
}

bool RisResponse::feasible(double tol) const {
  return psi.size() > 0 && psi.cwiseAbs().maxCoeff() <= 1.0 + tol;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_inv(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error("q_inv: probability must lie in (0, 1)");
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * eps);
}

double penalty_coeff(int blocklength, double error_prob) {
  if (blocklength < 1) throw Error("penalty_coeff: blocklength must be >= 1");
  if (!(error_prob > 0.0 && error_prob < 0.5)) throw Error("penalty_coeff: error probability must lie in (0, 0.5)");
  return std::log2(std::exp(1.0)) / std::sqrt(static_cast<double>(blocklength)) * q_inv(error_prob);
}

double sinr_generic(const SystemModel& sys, int sensor, const CVector& filter, const CVector& psi) {
  const double fnorm2 = filter.squaredNorm();
  if (!(fnorm2 > 0.0)) throw Error("sinr_generic: zero receive filter");
  const auto i = static_cast<std::size_t>(sensor);
  const double signal = sys.power[i] * std::norm(filter.dot(sys.channels[i] * psi));
  double denom = sys.noise_var * fnorm2 + psi.squaredNorm() * filter.dot(sys.c_tilde * filter).real();
  for (std::size_t j = 0; j < sys.channels.size(); ++j) {
    if (j == i) continue;
    denom += sys.power[j] * std::norm(filter.dot(sys.channels[j] * psi));
  }
  return denom > 0.0 ? signal / denom : 0.0;
}

std::vector<double> sinr_mrc(const SystemModel& sys, const CVector& psi) {
  const std::size_t m = sys.channels.size();
  std::vector<CVector> f;
  f.reserve(m);
  for (const auto& h : sys.channels) f.push_back(h * psi);
  const double psi2 = psi.squaredNorm();
  std::vector<double> rho(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double g = f[i].squaredNorm();
    if (!(g > 0.0)) continue;
    double denom = sys.noise_var * g + psi2 * f[i].dot(sys.c_tilde * f[i]).real();
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) denom += sys.power[j] * std::norm(f[i].dot(f[j]));
    }
    rho[i] = denom > 0.0 ? sys.power[i] * g * g / denom : 0.0;
  }
  return rho;
}

Complex trace_product(const CMatrix& a, const CMatrix& phi) {
  return a.transpose().cwiseProduct(phi).sum();
}

std::vector<double> sinr_single(const SystemModel& sys, const CMatrix& phi) {
  if (sys.num_antennas() != 1) throw Error("sinr_single: requires a single-antenna CN");
  const std::size_t m = sys.channels.size();
  const double c = sys.c_tilde(0, 0).real();
  std::vector<double> quad(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& h = sys.channels[j];  // 1 x L
    quad[j] = (h * phi * h.adjoint())(0, 0).real();
  }
  const double tr = phi.trace().real();
  std::vector<double> rho(m);
  for (std::size_t i = 0; i < m; ++i) {
    double denom = sys.noise_var + c * tr;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) denom += sys.power[j] * quad[j];
    }
    rho[i] = denom > 0.0 ? sys.power[i] * quad[i] / denom : 0.0;
  }
  return rho;
}

LiftedSystem lift(const SystemModel& sys) {
  const std::size_t m = sys.channels.size();
  LiftedSystem out;
  out.power = sys.power;
  out.noise_var = sys.noise_var;
  out.xi.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.xi[i].reserve(m);
    for (std::size_t j = 0; j < m; ++j) out.xi[i].push_back(sys.channels[i].adjoint() * sys.channels[j]);
    CMatrix lam = sys.channels[i].adjoint() * sys.c_tilde * sys.channels[i];
    out.lambda.push_back(0.5 * (lam + lam.adjoint()));
  }
  return out;
}

double SinrParts::sinr() const {
  const double d = noise + error + interference;
  return d > 0.0 ? signal / d : 0.0;
}

SinrParts sinr_lifted_multi(const LiftedSystem& sys, int sensor, const CMatrix& phi) {
  const auto i = static_cast<std::size_t>(sensor);
  SinrParts parts;
  const double t = trace_product(sys.xi[i][i], phi).real();
  parts.signal = sys.power[i] * t * t;
  parts.noise = sys.noise_var * t;
  parts.error = trace_product(sys.lambda[i], phi * phi).real();
  for (std::size_t j = 0; j < sys.xi.size(); ++j) {
    if (j != i) parts.interference += sys.power[j] * std::norm(trace_product(sys.xi[i][j], phi));
  }
  return parts;
}

std::vector<double> sinr_lifted_multi(const LiftedSystem& sys, const CMatrix& phi) {
  std::vector<double> rho;
  for (int i = 0; i < sys.num_sensors(); ++i) rho.push_back(sinr_lifted_multi(sys, i, phi).sinr());
  return rho;
}

double capacity(double rho) { return std::log2(1.0 + rho); }

double dispersion(double rho) { return std::sqrt(2.0 * rho / (1.0 + rho)); }

double rate_fblr_unclamped(double rho, double penalty) { return capacity(rho) - penalty * dispersion(rho); }

double rate_fblr(double rho, double penalty) { return std::max(0.0, rate_fblr_unclamped(rho, penalty)); }

double wsr(std::span<const double> sinr, std::span<const double> penalty, std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < sinr.size(); ++i) total += weights[i] * rate_fblr(sinr[i], penalty[i]);
  return total;
}

double wsr_unclamped(std::span<const double> sinr, std::span<const double> penalty,
                     std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < sinr.size(); ++i) total += weights[i] * rate_fblr_unclamped(sinr[i], penalty[i]);
  return total;
}

std::vector<double> sinr_true_mrc(std::span<const CMatrix> true_channels, std::span<const CMatrix> estimates,
                                  std::span<const double> power, double noise_var, const CVector& psi) {
  const std::size_t m = true_channels.size();
  std::vector<CVector> rx;
  for (const auto& h : true_channels) rx.push_back(h * psi);
  std::vector<double> rho(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const CVector f = estimates[i] * psi;
    const double g = f.squaredNorm();
    if (!(g > 0.0)) continue;
    double denom = noise_var * g;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) denom += power[j] * std::norm(f.dot(rx[j]));
    }
    rho[i] = denom > 0.0 ? power[i] * std::norm(f.dot(rx[i])) / denom : 0.0;
  }
  return rho;
}

std::vector<double> fairness_weights(const SystemModel& sys) {
  const CVector ones = CVector::Ones(sys.num_ris());
  const auto rho = sinr_mrc(sys, ones);
  std::vector<double> w;
  for (double r : rho) w.push_back(1.0 / std::max(r, 1e-12));
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x *= static_cast<double>(w.size()) / sum;
  return w;
}

}  // namespace risopt
