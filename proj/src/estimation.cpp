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


#include "risopt/estimation.hpp"

#include <cmath>

namespace risopt {

namespace {

double relative_guard(const CMatrix& c) { return 1e-300 + 1e-14 * c.diagonal().real().cwiseAbs().maxCoeff(); }

}  // namespace

ChannelPrior channel_prior(const ScenarioConfig& cfg, const LargeScale& ls, const LosGeometry& los,
                           int sensor) {
  const auto i = static_cast<std::size_t>(sensor);
  const double gamma = cfg.rician_ris_cn;
  const double delta = cfg.rician_sensor_ris.at(i);
  const double beta = ls.beta.at(i);
  const Eigen::Index k = los.cn_steering.rows();
  const Eigen::Index l = los.cn_steering.cols();

  const CMatrix gram = los.cn_steering * los.cn_steering.adjoint() / static_cast<double>(l);
  ChannelPrior prior;
  prior.cov_block = ls.alpha * beta / ((1.0 + gamma) * (1.0 + delta)) *
                    ((1.0 + delta) * CMatrix::Identity(k, k) + gamma * gram);

  const double mean_scale = std::sqrt(ls.alpha * gamma / (1.0 + gamma)) * std::sqrt(beta * delta / (1.0 + delta));
  const CMatrix mean = mean_scale * los.cn_steering * los.sensor_steering.at(i).asDiagonal();
  prior.mean = mean.reshaped();
  return prior;
}

double pilot_noise_var(const ScenarioConfig& cfg, int sensor) {
  return cfg.noise_var() / (static_cast<double>(cfg.pilot_length) * cfg.tx_power_w(sensor));
}

PilotObservation pilot_observe(const ChannelRealization& truth, const ScenarioConfig& cfg, Rng& rng,
                               int sensor) {
  PilotObservation obs;
  obs.noise_var = pilot_noise_var(cfg, sensor);
  const CMatrix& h = truth.cascaded.at(static_cast<std::size_t>(sensor));
  obs.z = h.reshaped();
  const double sd = std::sqrt(obs.noise_var);
  for (Eigen::Index e = 0; e < obs.z.size(); ++e) obs.z(e) += sd * complex_normal(rng);
  return obs;
}

CMatrix mmse_gain_block(const CMatrix& cov_block, double noise_var) {
  const Eigen::Index k = cov_block.rows();
  const CMatrix system = cov_block + noise_var * CMatrix::Identity(k, k);
  Eigen::LLT<CMatrix> llt(system);
  if (llt.info() != Eigen::Success || llt.matrixLLT().diagonal().real().minCoeff() <= relative_guard(system)) {
    throw Error("mmse: singular system (zero pilot noise with a rank-deficient prior)");
  }
  // C (C + sI)^-1 = ((C + sI)^-1 C)^H for Hermitian C.
  return llt.solve(cov_block).adjoint();
}

CMatrix mmse_estimate(const CVector& z, const ChannelPrior& prior, double noise_var, int num_antennas) {
  const Eigen::Index k = num_antennas;
  if (z.size() % k != 0 || z.size() != prior.mean.size()) throw Error("mmse_estimate: dimension mismatch");
  const Eigen::Index l = z.size() / k;
  const CMatrix gain = mmse_gain_block(prior.cov_block, noise_var);
  const auto zm = z.reshaped(k, l);
  const auto mu = prior.mean.reshaped(k, l);
  // h = A z + (I - A) mu = mu + A (z - mu)
  return mu + gain * (zm - mu);
}

CMatrix error_cov_block(const CMatrix& cov_block, double noise_var) {
  const CMatrix gain = mmse_gain_block(cov_block, noise_var);
  CMatrix e = cov_block - gain * cov_block;
  return 0.5 * (e + e.adjoint());
}

CMatrix error_covariance_total(std::span<const ChannelPrior> priors, std::span<const double> noise_var,
                               std::span<const double> power) {
  if (priors.empty()) throw Error("error_covariance_total: no priors");
  if (noise_var.size() != priors.size() || power.size() != priors.size()) {
    throw Error("error_covariance_total: size mismatch");
  }
  const Eigen::Index k = priors.front().cov_block.rows();
  CMatrix total = CMatrix::Zero(k, k);
  for (std::size_t j = 0; j < priors.size(); ++j) {
    total += power[j] * error_cov_block(priors[j].cov_block, noise_var[j]);
  }
  return total;
}

CMatrix lambda_matrix(const CMatrix& h_hat, const CMatrix& c_tilde) {
  CMatrix lam = h_hat.adjoint() * c_tilde * h_hat;
  return 0.5 * (lam + lam.adjoint());
}

ChannelEstimate estimate_channels(const ChannelRealization& truth, const ScenarioConfig& cfg,
                                  std::span<const ChannelPrior> priors, std::vector<Rng>& pilot_streams) {
  const int m = cfg.num_sensors;
  ChannelEstimate est;
  std::vector<double> noise;
  for (int i = 0; i < m; ++i) {
    auto& rng = pilot_streams.at(static_cast<std::size_t>(i));
    est.obs.push_back(pilot_observe(truth, cfg, rng, i));
    const auto& obs = est.obs.back();
    est.h_hat.push_back(mmse_estimate(obs.z, priors[static_cast<std::size_t>(i)], obs.noise_var, cfg.num_antennas));
    noise.push_back(obs.noise_var);
  }
  const auto power = cfg.tx_power_w();
  est.c_tilde = error_covariance_total(priors, noise, power);
  for (const auto& h : est.h_hat) est.lambda.push_back(lambda_matrix(h, est.c_tilde));
  return est;
}

}  // namespace risopt
