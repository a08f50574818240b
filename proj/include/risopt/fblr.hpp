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

#include <span>
#include <vector>

#include "risopt/types.hpp"

namespace risopt {

/// What the SINR expressions see: channel matrices (estimates for the
/// optimizer, or any stand-in), the total error covariance C~, transmit
/// powers and receiver noise.
struct SystemModel {
  std::vector<CMatrix> channels;  // K x L each
  CMatrix c_tilde;                // K x K
  std::vector<double> power;      // watts (or any consistent unit)
  double noise_var = 0.0;

  int num_sensors() const { return static_cast<int>(channels.size()); }
  int num_antennas() const { return static_cast<int>(channels.front().rows()); }
  int num_ris() const { return static_cast<int>(channels.front().cols()); }
};

/// Rescaled copy with noise_var = 1 and max power = 1. Every SINR is
/// unchanged by this map.
SystemModel normalized(const SystemModel& sys);

/// RIS reflection vector psi, |psi_l| <= 1.
struct RisResponse {
  CVector psi;

  bool feasible(double tol = 1e-12) const;
  CMatrix lifted() const { return psi * psi.adjoint(); }
};

struct FblrParams {
  std::vector<double> penalty;  // a_i
  std::vector<double> weights;  // omega_i
};

double q_function(double x);

/// Inverse Gaussian tail; throws outside (0, 1).
double q_inv(double eps);

/// a = log2(e) Q^-1(eps) / sqrt(n).
double penalty_coeff(int blocklength, double error_prob);

/// Equivalent SINR with an arbitrary receive filter f (error term as
/// ||psi||^2 f^H C~ f). Throws for a zero filter.
double sinr_generic(const SystemModel& sys, int sensor, const CVector& filter, const CVector& psi);

/// MRC (f_i = H_i psi) SINRs of all sensors. Zero when H_i psi = 0.
std::vector<double> sinr_mrc(const SystemModel& sys, const CVector& psi);

/// Single-antenna trace form, valid for any Hermitian PSD Phi. Needs K = 1.
std::vector<double> sinr_single(const SystemModel& sys, const CMatrix& phi);

/// Precomputed Xi_{i,j} = H_i^H H_j and Lambda_i = H_i^H C~ H_i.
struct LiftedSystem {
  std::vector<std::vector<CMatrix>> xi;
  std::vector<CMatrix> lambda;
  std::vector<double> power;
  double noise_var = 0.0;

  int num_sensors() const { return static_cast<int>(lambda.size()); }
  int num_ris() const { return static_cast<int>(lambda.front().rows()); }
};

LiftedSystem lift(const SystemModel& sys);

/// S/(W + E + I) decomposition of the lifted SINR.
struct SinrParts {
  double signal = 0.0;
  double noise = 0.0;
  double error = 0.0;
  double interference = 0.0;

  double total() const { return signal + noise + error + interference; }
  double sinr() const;
};

/// tr(A Phi) for the Hermitian-times-Hermitian products used throughout.
Complex trace_product(const CMatrix& a, const CMatrix& phi);

SinrParts sinr_lifted_multi(const LiftedSystem& sys, int sensor, const CMatrix& phi);
std::vector<double> sinr_lifted_multi(const LiftedSystem& sys, const CMatrix& phi);

double capacity(double rho);
/// sqrt(V) with V(rho) = 2 rho / (1 + rho).
double dispersion(double rho);
double rate_fblr_unclamped(double rho, double penalty);
/// max(0, C - a D).
double rate_fblr(double rho, double penalty);

double wsr(std::span<const double> sinr, std::span<const double> penalty, std::span<const double> weights);
double wsr_unclamped(std::span<const double> sinr, std::span<const double> penalty,
                     std::span<const double> weights);

/// SINR actually delivered when the CN combines with f_i = H_hat_i psi but
/// the signals propagate through the true channels.
std::vector<double> sinr_true_mrc(std::span<const CMatrix> true_channels, std::span<const CMatrix> estimates,
                                  std::span<const double> power, double noise_var, const CVector& psi);

/// omega_i proportional to 1/rho_i(all-ones psi), normalized to sum to M.
std::vector<double> fairness_weights(const SystemModel& sys);

}  // namespace risopt
