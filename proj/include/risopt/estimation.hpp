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

#include "risopt/channel.hpp"
#include "risopt/rng.hpp"
#include "risopt/scenario.hpp"
#include "risopt/types.hpp"

namespace risopt {

/// Statistics of vec(H_i): mean and covariance I_L (x) cov_block.
struct ChannelPrior {
  CVector mean;       // length K*L, column-major vec
  CMatrix cov_block;  // K x K Hermitian PSD
};

/// Kronecker prior of the cascaded channel. The RIS->CN LoS Gram enters as
/// the per-element average G'' G''^H / L, which is the per-column covariance
/// when the LoS term is separable and the Frobenius-nearest I_L (x) X
/// otherwise.
ChannelPrior channel_prior(const ScenarioConfig& cfg, const LargeScale& ls, const LosGeometry& los,
                           int sensor);

/// Effective pilot-correlation output for one sensor.
struct PilotObservation {
  CVector z;               // vec(H_i) + noise
  double noise_var = 0.0;  // sigma_w^2 / (N P_i)
};

double pilot_noise_var(const ScenarioConfig& cfg, int sensor);

PilotObservation pilot_observe(const ChannelRealization& truth, const ScenarioConfig& cfg, Rng& rng,
                               int sensor);

/// C (C + s I)^-1 for the K x K block, via Cholesky.
CMatrix mmse_gain_block(const CMatrix& cov_block, double noise_var);

/// LMMSE estimate reshaped to K x L. Uses the Kronecker structure: each
/// column is estimated independently with the K x K gain.
CMatrix mmse_estimate(const CVector& z, const ChannelPrior& prior, double noise_var, int num_antennas);

/// Per-sensor error covariance block C - C (C + s I)^-1 C.
CMatrix error_cov_block(const CMatrix& cov_block, double noise_var);

/// sum_j P_j (C_j - C_j (C_j + s_j I)^-1 C_j).
CMatrix error_covariance_total(std::span<const ChannelPrior> priors, std::span<const double> noise_var,
                               std::span<const double> power);

/// H^H C~ H.
CMatrix lambda_matrix(const CMatrix& h_hat, const CMatrix& c_tilde);

/// Everything the CN knows about one realization.
struct ChannelEstimate {
  std::vector<CMatrix> h_hat;
  std::vector<PilotObservation> obs;
  CMatrix c_tilde;
  std::vector<CMatrix> lambda;
};

ChannelEstimate estimate_channels(const ChannelRealization& truth, const ScenarioConfig& cfg,
                                  std::span<const ChannelPrior> priors, std::vector<Rng>& pilot_streams);

}  // namespace risopt
