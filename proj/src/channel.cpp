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


#include "risopt/channel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace risopt {

ArrayGeometry build_geometry(const ScenarioConfig& cfg, std::vector<Eigen::Vector3d> sensors) {
  const double spacing = 0.5 * cfg.wavelength();
  ArrayGeometry g;
  const int k = cfg.num_antennas;
  for (int a = 0; a < k; ++a) {
    const double offset = (a - 0.5 * (k - 1)) * spacing;
    g.cn_elements.push_back(cfg.positions.cn + Eigen::Vector3d(offset, 0.0, 0.0));
  }
  const int side = cfg.ris_side();
  if (side * side != cfg.num_ris) throw ConfigError("config key 'l': must be a perfect square (planar array)");
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const double dy = (col - 0.5 * (side - 1)) * spacing;
      const double dz = (row - 0.5 * (side - 1)) * spacing;
      g.ris_elements.push_back(cfg.positions.ris + Eigen::Vector3d(0.0, dy, dz));
    }
  }
  g.sensors = std::move(sensors);
  return g;
}

Complex los_phase(double distance_m, double wavelength_m) {
  return std::polar(1.0, -2.0 * kPi * distance_m / wavelength_m);
}

LosGeometry los_response(const ScenarioConfig& cfg, const ArrayGeometry& geometry) {
  const double lambda = cfg.wavelength();
  const auto k = static_cast<Eigen::Index>(geometry.cn_elements.size());
  const auto l = static_cast<Eigen::Index>(geometry.ris_elements.size());
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(l))));
  if (side * side != l) throw ConfigError("config key 'l': must be a perfect square (planar array)");

  LosGeometry los;
  los.cn_steering.resize(k, l);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < l; ++b) {
      const double d = (geometry.cn_elements[static_cast<std::size_t>(a)] -
                        geometry.ris_elements[static_cast<std::size_t>(b)]).norm();
      los.cn_steering(a, b) = los_phase(d, lambda);
    }
  }
  for (const auto& s : geometry.sensors) {
    CVector v(l);
    for (Eigen::Index b = 0; b < l; ++b) {
      v(b) = los_phase((s - geometry.ris_elements[static_cast<std::size_t>(b)]).norm(), lambda);
    }
    los.sensor_steering.push_back(std::move(v));
  }
  return los;
}

namespace {

Eigen::Vector3d centroid(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

}  // namespace

double ris_cn_distance(const ArrayGeometry& geometry) {
  return (centroid(geometry.cn_elements) - centroid(geometry.ris_elements)).norm();
}

std::vector<double> sensor_ris_distances(const ArrayGeometry& geometry) {
  const Eigen::Vector3d ris = centroid(geometry.ris_elements);
  std::vector<double> d;
  for (const auto& s : geometry.sensors) d.push_back((s - ris).norm());
  return d;
}

ChannelStreams make_channel_streams(std::uint64_t seed, std::uint64_t realization, int num_sensors) {
  ChannelStreams streams{make_stream(seed, realization, StreamPurpose::ris_cn), {}};
  for (int i = 0; i < num_sensors; ++i) {
    streams.sensors.push_back(
        make_stream(seed, realization, StreamPurpose::sensor_ris, static_cast<std::uint64_t>(i)));
  }
  return streams;
}

ChannelRealization draw_channels(const ScenarioConfig& cfg, const LargeScale& ls,
                                 const LosGeometry& los, ChannelStreams& streams) {
  const Eigen::Index k = los.cn_steering.rows();
  const Eigen::Index l = los.cn_steering.cols();
  const double gamma = cfg.rician_ris_cn;

  ChannelRealization r;
  r.ris_cn.resize(k, l);
  const double g_scale = std::sqrt(ls.alpha / (1.0 + gamma));
  const double g_los = std::sqrt(gamma);
  for (Eigen::Index col = 0; col < l; ++col) {
    for (Eigen::Index row = 0; row < k; ++row) {
      r.ris_cn(row, col) = g_scale * (complex_normal(streams.ris_cn) + g_los * los.cn_steering(row, col));
    }
  }
  const std::size_t m = los.sensor_steering.size();
  if (streams.sensors.size() < m || ls.beta.size() < m) throw Error("draw_channels: sensor count mismatch");
  for (std::size_t i = 0; i < m; ++i) {
    const double delta = cfg.rician_sensor_ris.at(i);
    const double scale = std::sqrt(ls.beta[i] / (1.0 + delta));
    const double los_w = std::sqrt(delta);
    CVector g(l);
    for (Eigen::Index e = 0; e < l; ++e) {
      g(e) = scale * (complex_normal(streams.sensors[i]) + los_w * los.sensor_steering[i](e));
    }
    r.cascaded.push_back(cascade(r.ris_cn, g));
    r.sensor_ris.push_back(std::move(g));
  }
  return r;
}

CMatrix cascade(const CMatrix& ris_cn, const CVector& sensor_ris) {
  if (ris_cn.cols() != sensor_ris.size()) throw Error("cascade: dimension mismatch");
  return ris_cn * sensor_ris.asDiagonal();
}

namespace {

constexpr std::array<char, 8> kMagic{'R', 'I', 'S', 'C', 'H', 'A', 'N', '1'};

template <class T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw Error("read_realization: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void put_complex(std::ostream& out, Complex c) {
  put_le(out, c.real());
  put_le(out, c.imag());
}

Complex get_complex(std::istream& in) {
  const double re = get_le<double>(in);
  const double im = get_le<double>(in);
  return {re, im};
}

}  // namespace

void write_realization(std::ostream& out, const ChannelRealization& r) {
  out.write(kMagic.data(), kMagic.size());
  put_le(out, static_cast<std::int32_t>(r.ris_cn.rows()));
  put_le(out, static_cast<std::int32_t>(r.ris_cn.cols()));
  put_le(out, static_cast<std::int32_t>(r.sensor_ris.size()));
  for (Eigen::Index i = 0; i < r.ris_cn.size(); ++i) put_complex(out, r.ris_cn.data()[i]);
  for (const auto& g : r.sensor_ris) {
    for (Eigen::Index i = 0; i < g.size(); ++i) put_complex(out, g(i));
  }
  for (const auto& h : r.cascaded) {
    for (Eigen::Index i = 0; i < h.size(); ++i) put_complex(out, h.data()[i]);
  }
}

ChannelRealization read_realization(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw Error("read_realization: bad magic");
  const auto k = get_le<std::int32_t>(in);
  const auto l = get_le<std::int32_t>(in);
  const auto m = get_le<std::int32_t>(in);
  if (k < 1 || l < 1 || m < 0) throw Error("read_realization: bad dimensions");
  ChannelRealization r;
  r.ris_cn.resize(k, l);
  for (Eigen::Index i = 0; i < r.ris_cn.size(); ++i) r.ris_cn.data()[i] = get_complex(in);
  for (int s = 0; s < m; ++s) {
    CVector g(l);
    for (Eigen::Index i = 0; i < l; ++i) g(i) = get_complex(in);
    r.sensor_ris.push_back(std::move(g));
  }
  for (int s = 0; s < m; ++s) {
    CMatrix h(k, l);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = get_complex(in);
    r.cascaded.push_back(std::move(h));
  }
  return r;
}

}  // namespace risopt
