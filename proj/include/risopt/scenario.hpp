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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "risopt/rng.hpp"
#include "risopt/types.hpp"

namespace risopt {

enum class WeightPolicy { equal, fair };

std::string to_string(WeightPolicy policy);
WeightPolicy parse_weight_policy(const std::string& text);

/// Node placement in meters. An empty `sensors` list means the sensors are
/// dropped uniformly over the deployment square for every realization.
struct Positions {
  Eigen::Vector3d cn{5.0, 0.0, 0.0};
  Eigen::Vector3d ris{0.0, 5.0, 0.0};
  std::vector<Eigen::Vector3d> sensors;

  bool operator==(const Positions&) const = default;
};

/// One experiment. Per-sensor fields always hold exactly `num_sensors`
/// entries after validation; scalars in the config file are broadcast.
struct ScenarioConfig {
  int num_sensors = 10;
  int num_antennas = 4;
  int num_ris = 16;
  std::vector<double> tx_power_dbm;
  double noise_density_dbm_hz = -174.0;
  double bandwidth_hz = 20e6;
  double carrier_hz = 2e9;
  std::vector<int> blocklength;
  std::vector<double> error_prob;
  double rician_ris_cn = 10.0;
  std::vector<double> rician_sensor_ris;
  long long pilot_length = 10;
  WeightPolicy weight_policy = WeightPolicy::equal;
  double area_side_m = 3.162;
  Positions positions;
  std::uint64_t seed = 1;
  int mc_realizations = 1;

  double noise_var() const;
  double tx_power_w(int sensor) const;
  std::vector<double> tx_power_w() const;
  double wavelength() const;
  int ris_side() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Settings from the indoor-hotspot baseline: M=10, K=4, L=16, 10 dBm,
/// -174 dBm/Hz over 20 MHz at 2 GHz, 100-symbol packets at 1e-3 error rate.
ScenarioConfig baseline_config();

/// Throws ConfigError naming the offending key.
void validate(const ScenarioConfig& cfg);

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);
void write_config(const ScenarioConfig& cfg, std::ostream& out);

/// Copy of `cfg` with a different sensor count. Per-sensor parameters must
/// be uniform (they are re-broadcast); explicit sensor positions are dropped.
ScenarioConfig with_sensor_count(const ScenarioConfig& cfg, int num_sensors);

double dbm_to_watt(double dbm);

/// Indoor-hotspot LoS path loss in dB: 32.8 + 16.9 log10(d) + 20 log10(fc/GHz).
double path_loss_db(double distance_m, double carrier_hz);
double path_gain(double distance_m, double carrier_hz);

/// Large-scale power gains: alpha for RIS->CN, beta[i] for sensor i -> RIS.
struct LargeScale {
  double alpha = 0.0;
  std::vector<double> beta;
};

LargeScale derive_large_scale(const ScenarioConfig& cfg, double ris_cn_distance_m,
                              std::span<const double> sensor_ris_distance_m);

/// Uniform drop over [0, side]^2 at z = 0.
std::vector<Eigen::Vector3d> place_sensors(const ScenarioConfig& cfg, Rng& rng);

}  // namespace risopt
