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


#include "risopt/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace risopt {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as a number");
  }
}

long long to_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as an integer");
  }
}

std::string required(const pt::ptree& tree, const std::string& key) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) throw ConfigError("config key '" + key + "' is required");
  return trim(*v);
}

std::vector<double> doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(to_double(key, part));
  if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
  return out;
}

template <class T>
std::vector<T> broadcast(const std::string& key, std::vector<T> values, int m) {
  if (values.size() == 1) return std::vector<T>(static_cast<std::size_t>(m), values.front());
  if (static_cast<int>(values.size()) != m) {
    throw ConfigError("config key '" + key + "' must hold 1 or m = " + std::to_string(m) +
                      " values, got " + std::to_string(values.size()));
  }
  return values;
}

Eigen::Vector3d point(const std::string& key, const std::string& text) {
  const auto v = doubles(key, text);
  if (v.size() != 2 && v.size() != 3) {
    throw ConfigError("config key '" + key + "' must be 'x,y' or 'x,y,z'");
  }
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& values) {
  if (!values.empty() &&
      std::all_of(values.begin(), values.end(), [&](const T& x) { return x == values.front(); })) {
    if constexpr (std::is_floating_point_v<T>) return fmt(values.front());
    else return std::to_string(values.front());
  }
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) out += fmt(values[i]);
    else out += std::to_string(values[i]);
  }
  return out;
}

std::string fmt_point(const Eigen::Vector3d& p) {
  return fmt(p.x()) + "," + fmt(p.y()) + "," + fmt(p.z());
}

}  // namespace

std::string to_string(WeightPolicy policy) {
  return policy == WeightPolicy::equal ? "equal" : "fair";
}

WeightPolicy parse_weight_policy(const std::string& text) {
  if (text == "equal") return WeightPolicy::equal;
  if (text == "fair") return WeightPolicy::fair;
  throw ConfigError("config key 'weight_policy' must be 'equal' or 'fair', got '" + text + "'");
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double ScenarioConfig::noise_var() const {
  return std::pow(10.0, (noise_density_dbm_hz + 10.0 * std::log10(bandwidth_hz) - 30.0) / 10.0);
}

double ScenarioConfig::tx_power_w(int sensor) const {
  return dbm_to_watt(tx_power_dbm.at(static_cast<std::size_t>(sensor)));
}

std::vector<double> ScenarioConfig::tx_power_w() const {
  std::vector<double> out;
  out.reserve(tx_power_dbm.size());
  for (double p : tx_power_dbm) out.push_back(dbm_to_watt(p));
  return out;
}

double ScenarioConfig::wavelength() const { return kSpeedOfLight / carrier_hz; }

int ScenarioConfig::ris_side() const {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_ris))));
}

ScenarioConfig baseline_config() {
  ScenarioConfig cfg;
  const auto m = static_cast<std::size_t>(cfg.num_sensors);
  cfg.tx_power_dbm.assign(m, 10.0);
  cfg.blocklength.assign(m, 100);
  cfg.error_prob.assign(m, 1e-3);
  cfg.rician_sensor_ris.assign(m, 10.0);
  return cfg;
}

void validate(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
  };
  if (cfg.num_sensors < 1) fail("m", "must be a positive integer");
  if (cfg.num_antennas < 1) fail("k", "must be a positive integer");
  if (cfg.num_ris < 1) fail("l", "must be a positive integer");
  if (cfg.ris_side() * cfg.ris_side() != cfg.num_ris) fail("l", "must be a perfect square (planar array)");
  const auto m = static_cast<std::size_t>(cfg.num_sensors);
  if (cfg.tx_power_dbm.size() != m) fail("tx_power_dbm", "needs one value per sensor");
  if (cfg.blocklength.size() != m) fail("blocklength", "needs one value per sensor");
  if (cfg.error_prob.size() != m) fail("error_prob", "needs one value per sensor");
  if (cfg.rician_sensor_ris.size() != m) fail("rician_sensor_ris", "needs one value per sensor");
  for (double p : cfg.tx_power_dbm) {
    if (!std::isfinite(p)) fail("tx_power_dbm", "must be finite");
  }
  for (int n : cfg.blocklength) {
    if (n < 1) fail("blocklength", "must be >= 1");
  }
  for (double e : cfg.error_prob) {
    if (!(e > 0.0 && e < 0.5)) fail("error_prob", "error_prob out of range (0, 0.5)");
  }
  for (double d : cfg.rician_sensor_ris) {
    if (!(d >= 0.0) || !std::isfinite(d)) fail("rician_sensor_ris", "must be a finite nonnegative real");
  }
  if (!(cfg.rician_ris_cn >= 0.0) || !std::isfinite(cfg.rician_ris_cn)) {
    fail("rician_ris_cn", "must be a finite nonnegative real");
  }
  if (!std::isfinite(cfg.noise_density_dbm_hz)) fail("noise_density_dbm_hz", "must be finite");
  if (!(cfg.bandwidth_hz > 0.0)) fail("bandwidth_hz", "must be positive");
  if (!(cfg.carrier_hz > 0.0)) fail("carrier_hz", "must be positive");
  if (cfg.pilot_length < cfg.num_sensors) fail("pilot_length", "must satisfy N >= m");
  if (!(cfg.area_side_m > 0.0)) fail("area_side_m", "must be positive");
  if (cfg.mc_realizations < 1) fail("mc_realizations", "must be a positive integer");
  if (!cfg.positions.sensors.empty() && cfg.positions.sensors.size() != m) {
    fail("positions.sensors", "needs exactly m positions");
  }
}

ScenarioConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }

  ScenarioConfig cfg;
  auto integer = [&](const std::string& key) { return to_integer(key, required(tree, key)); };
  auto real = [&](const std::string& key) { return to_double(key, required(tree, key)); };

  cfg.num_sensors = static_cast<int>(integer("m"));
  cfg.num_antennas = static_cast<int>(integer("k"));
  cfg.num_ris = static_cast<int>(integer("l"));
  if (cfg.num_sensors < 1) throw ConfigError("config key 'm': must be a positive integer");
  const int m = cfg.num_sensors;

  cfg.tx_power_dbm = broadcast("tx_power_dbm", doubles("tx_power_dbm", required(tree, "tx_power_dbm")), m);
  cfg.noise_density_dbm_hz = real("noise_density_dbm_hz");
  cfg.bandwidth_hz = real("bandwidth_hz");
  cfg.carrier_hz = real("carrier_hz");

  std::vector<int> n;
  for (const auto& part : split(required(tree, "blocklength"), ',')) {
    n.push_back(static_cast<int>(to_integer("blocklength", part)));
  }
  if (n.empty()) throw ConfigError("config key 'blocklength' is empty");
  cfg.blocklength = broadcast("blocklength", n, m);
  cfg.error_prob = broadcast("error_prob", doubles("error_prob", required(tree, "error_prob")), m);
  cfg.pilot_length = integer("pilot_length");
  cfg.weight_policy = parse_weight_policy(required(tree, "weight_policy"));
  cfg.seed = static_cast<std::uint64_t>(std::stoull(required(tree, "seed")));
  cfg.mc_realizations = static_cast<int>(integer("mc_realizations"));

  if (auto v = tree.get_optional<std::string>("rician_ris_cn")) {
    cfg.rician_ris_cn = to_double("rician_ris_cn", trim(*v));
  }
  std::vector<double> delta{10.0};
  if (auto v = tree.get_optional<std::string>("rician_sensor_ris")) {
    delta = doubles("rician_sensor_ris", trim(*v));
  }
  cfg.rician_sensor_ris = broadcast("rician_sensor_ris", delta, m);
  if (auto v = tree.get_optional<std::string>("area_side_m")) {
    cfg.area_side_m = to_double("area_side_m", trim(*v));
  }
  if (auto v = tree.get_optional<std::string>("positions.cn")) {
    cfg.positions.cn = point("positions.cn", trim(*v));
  }
  if (auto v = tree.get_optional<std::string>("positions.ris")) {
    cfg.positions.ris = point("positions.ris", trim(*v));
  }
  if (auto v = tree.get_optional<std::string>("positions.sensors")) {
    for (const auto& p : split(trim(*v), ';')) {
      cfg.positions.sensors.push_back(point("positions.sensors", p));
    }
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

void write_config(const ScenarioConfig& cfg, std::ostream& out) {
  out << "m = " << cfg.num_sensors << "\n"
      << "k = " << cfg.num_antennas << "\n"
      << "l = " << cfg.num_ris << "\n"
      << "tx_power_dbm = " << join(cfg.tx_power_dbm) << "\n"
      << "noise_density_dbm_hz = " << fmt(cfg.noise_density_dbm_hz) << "\n"
      << "bandwidth_hz = " << fmt(cfg.bandwidth_hz) << "\n"
      << "carrier_hz = " << fmt(cfg.carrier_hz) << "\n"
      << "blocklength = " << join(cfg.blocklength) << "\n"
      << "error_prob = " << join(cfg.error_prob) << "\n"
      << "rician_ris_cn = " << fmt(cfg.rician_ris_cn) << "\n"
      << "rician_sensor_ris = " << join(cfg.rician_sensor_ris) << "\n"
      << "pilot_length = " << cfg.pilot_length << "\n"
      << "weight_policy = " << to_string(cfg.weight_policy) << "\n"
      << "area_side_m = " << fmt(cfg.area_side_m) << "\n"
      << "seed = " << cfg.seed << "\n"
      << "mc_realizations = " << cfg.mc_realizations << "\n"
      << "\n[positions]\n"
      << "cn = " << fmt_point(cfg.positions.cn) << "\n"
      << "ris = " << fmt_point(cfg.positions.ris) << "\n";
  if (!cfg.positions.sensors.empty()) {
    out << "sensors = ";
    for (std::size_t i = 0; i < cfg.positions.sensors.size(); ++i) {
      if (i) out << "; ";
      out << fmt_point(cfg.positions.sensors[i]);
    }
    out << "\n";
  }
}

ScenarioConfig with_sensor_count(const ScenarioConfig& cfg, int num_sensors) {
  auto uniform = [](const auto& v) {
    return std::all_of(v.begin(), v.end(), [&](const auto& x) { return x == v.front(); });
  };
  if (!uniform(cfg.tx_power_dbm) || !uniform(cfg.blocklength) || !uniform(cfg.error_prob) ||
      !uniform(cfg.rician_sensor_ris)) {
    throw ConfigError("cannot change m: per-sensor parameters are not uniform");
  }
  ScenarioConfig out = cfg;
  const auto m = static_cast<std::size_t>(num_sensors);
  out.num_sensors = num_sensors;
  out.tx_power_dbm.assign(m, cfg.tx_power_dbm.front());
  out.blocklength.assign(m, cfg.blocklength.front());
  out.error_prob.assign(m, cfg.error_prob.front());
  out.rician_sensor_ris.assign(m, cfg.rician_sensor_ris.front());
  out.positions.sensors.clear();
  if (out.pilot_length < num_sensors) out.pilot_length = num_sensors;
  return out;
}

double path_loss_db(double distance_m, double carrier_hz) {
  if (!(distance_m > 0.0)) throw Error("path loss: distance must be positive");
  return 32.8 + 16.9 * std::log10(distance_m) + 20.0 * std::log10(carrier_hz / 1e9);
}

double path_gain(double distance_m, double carrier_hz) {
  return std::pow(10.0, -path_loss_db(distance_m, carrier_hz) / 10.0);
}

LargeScale derive_large_scale(const ScenarioConfig& cfg, double ris_cn_distance_m,
                              std::span<const double> sensor_ris_distance_m) {
  LargeScale ls;
  ls.alpha = path_gain(ris_cn_distance_m, cfg.carrier_hz);
  ls.beta.reserve(sensor_ris_distance_m.size());
  for (double d : sensor_ris_distance_m) ls.beta.push_back(path_gain(d, cfg.carrier_hz));
  return ls;
}

std::vector<Eigen::Vector3d> place_sensors(const ScenarioConfig& cfg, Rng& rng) {
  if (!cfg.positions.sensors.empty()) return cfg.positions.sensors;
  std::uniform_real_distribution<double> u(0.0, cfg.area_side_m);
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>(cfg.num_sensors));
  for (int i = 0; i < cfg.num_sensors; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    out.emplace_back(x, y, 0.0);
  }
  return out;
}

}  // namespace risopt
