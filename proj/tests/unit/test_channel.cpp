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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "risopt/channel.hpp"
#include "test_util.hpp"

using namespace risopt;

namespace {

struct Setup {
  ScenarioConfig cfg;
  ArrayGeometry geometry;
  LosGeometry los;
  LargeScale ls;
};

Setup make_setup(int k = 4, int l = 16, int m = 3, double gamma = 10.0) {
  Setup s;
  s.cfg = with_sensor_count(baseline_config(), m);
  s.cfg.num_antennas = k;
  s.cfg.num_ris = l;
  s.cfg.rician_ris_cn = gamma;
  Rng rng(11);
  s.geometry = build_geometry(s.cfg, place_sensors(s.cfg, rng));
  s.los = los_response(s.cfg, s.geometry);
  s.ls = derive_large_scale(s.cfg, ris_cn_distance(s.geometry), sensor_ris_distances(s.geometry));
  return s;
}

}  // namespace

TEST_CASE("los phase at zero distance is one") {
  CHECK(los_phase(0.0, 0.15) == Complex(1.0, 0.0));
  CHECK(std::abs(los_phase(0.075, 0.15) - Complex(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("steering entries have unit modulus") {
  const auto s = make_setup();
  CHECK(s.los.cn_steering.rows() == 4);
  CHECK(s.los.cn_steering.cols() == 16);
  CHECK((s.los.cn_steering.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
  for (const auto& v : s.los.sensor_steering) CHECK((v.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("non-square surface size is rejected") {
  auto cfg = baseline_config();
  cfg.num_ris = 12;
  CHECK_THROWS_AS(build_geometry(cfg, {}), ConfigError);
}

TEST_CASE("far sensor sees a planar wavefront") {
  auto cfg = with_sensor_count(baseline_config(), 1);
  const auto near = build_geometry(cfg, {});
  const double lambda = cfg.wavelength();
  const Eigen::Vector3d centre = cfg.positions.ris;
  double aperture = 0.0;
  for (const auto& a : near.ris_elements)
    for (const auto& b : near.ris_elements) aperture = std::max(aperture, (a - b).norm());
  const Eigen::Vector3d dir = Eigen::Vector3d(1.0, 0.4, 0.3).normalized();
  const double dist = 1000.0 * aperture;
  const auto geo = build_geometry(cfg, {centre + dist * dir});
  const auto los = los_response(cfg, geo);
  // plane wave: d_l ~ dist - dir . (r_l - centre)
  double worst = 0.0;
  for (std::size_t l = 0; l < geo.ris_elements.size(); ++l) {
    const double planar = -2.0 * kPi * (dist - dir.dot(geo.ris_elements[l] - centre)) / lambda;
    const double diff = std::arg(los.sensor_steering[0](static_cast<Eigen::Index>(l)) * std::polar(1.0, -planar));
    worst = std::max(worst, std::abs(diff));
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("strong LoS limit leaves only the steering term") {
  auto s = make_setup(4, 16, 2, 1e12);
  auto streams = make_channel_streams(5, 0, 2);
  const auto r = draw_channels(s.cfg, s.ls, s.los, streams);
  const CMatrix expected = std::sqrt(s.ls.alpha) * s.los.cn_steering;
  for (Eigen::Index i = 0; i < expected.size(); ++i) {
    CHECK(std::abs(r.ris_cn.data()[i] - expected.data()[i]) / std::abs(expected.data()[i]) < 1e-5);
  }
}

TEST_CASE("ris-cn entries have the Rician moments") {
  const auto s = make_setup(2, 4, 1);
  const int draws = 20000;
  CMatrix mean = CMatrix::Zero(2, 4);
  RMatrix second = RMatrix::Zero(2, 4);
  for (int d = 0; d < draws; ++d) {
    auto streams = make_channel_streams(99, static_cast<std::uint64_t>(d), 1);
    const auto r = draw_channels(s.cfg, s.ls, s.los, streams);
    mean += r.ris_cn;
    second += r.ris_cn.cwiseAbs2();
  }
  mean /= draws;
  second /= draws;
  const double a = s.ls.alpha;
  const double gamma = s.cfg.rician_ris_cn;
  const CMatrix los_mean = std::sqrt(a * gamma / (1.0 + gamma)) * s.los.cn_steering;
  CHECK((mean - los_mean).cwiseAbs().maxCoeff() < 3e-2 * std::sqrt(a));
  // per-entry variance (about the mean) is alpha/(1+gamma); E|G|^2 = alpha
  for (Eigen::Index i = 0; i < second.size(); ++i) CHECK(std::abs(second.data()[i] / a - 1.0) < 3e-2);
  const RMatrix var = second - mean.cwiseAbs2();
  for (Eigen::Index i = 0; i < var.size(); ++i) {
    CHECK(std::abs(var.data()[i] / (a / (1.0 + gamma)) - 1.0) < 3e-2);
  }
}

TEST_CASE("doubling alpha doubles the second moment") {
  auto s = make_setup(2, 4, 1);
  auto doubled = s;
  doubled.ls.alpha *= 2.0;
  double base = 0.0, twice = 0.0;
  const int draws = 20000;
  for (int d = 0; d < draws; ++d) {
    auto a = make_channel_streams(7, static_cast<std::uint64_t>(d), 1);
    auto b = make_channel_streams(8, static_cast<std::uint64_t>(d), 1);
    base += draw_channels(s.cfg, s.ls, s.los, a).ris_cn.squaredNorm();
    twice += draw_channels(doubled.cfg, doubled.ls, doubled.los, b).ris_cn.squaredNorm();
  }
  CHECK(std::abs(twice / base / 2.0 - 1.0) < 3e-2);
}

TEST_CASE("cascade forms G diag(g)") {
  Rng rng(4);
  const CMatrix g_mat = testutil::random_cmatrix(rng, 3, 5);
  CHECK(cascade(g_mat, CVector::Ones(5)) == g_mat);
  CMatrix scalar(1, 1);
  scalar(0, 0) = 2.0;
  CVector g1(1);
  g1(0) = Complex(0.0, 3.0);
  CHECK(cascade(scalar, g1)(0, 0) == Complex(0.0, 6.0));
  const CVector g = testutil::random_cmatrix(rng, 5, 1);
  const CVector psi = testutil::random_cmatrix(rng, 5, 1);
  const CVector two_path = g_mat * psi.asDiagonal() * g;
  CHECK((cascade(g_mat, g) * psi - two_path).norm() <= 1e-12 * two_path.norm());
  CHECK_THROWS(cascade(g_mat, CVector::Ones(4)));
}

TEST_CASE("draws are determined by the seed") {
  const auto s = make_setup();
  auto a = make_channel_streams(42, 3, 3);
  auto b = make_channel_streams(42, 3, 3);
  auto c = make_channel_streams(43, 3, 3);
  const auto ra = draw_channels(s.cfg, s.ls, s.los, a);
  const auto rb = draw_channels(s.cfg, s.ls, s.los, b);
  const auto rc = draw_channels(s.cfg, s.ls, s.los, c);
  CHECK(ra.ris_cn == rb.ris_cn);
  for (int i = 0; i < 3; ++i) {
    CHECK(ra.sensor_ris[i] == rb.sensor_ris[i]);
    CHECK(ra.cascaded[i] == rb.cascaded[i]);
    CHECK(ra.cascaded[i] == cascade(ra.ris_cn, ra.sensor_ris[i]));
  }
  CHECK(ra.ris_cn != rc.ris_cn);
}

TEST_CASE("binary dump round-trips") {
  const auto s = make_setup(2, 9, 2);
  auto streams = make_channel_streams(1, 0, 2);
  const auto r = draw_channels(s.cfg, s.ls, s.los, streams);
  std::stringstream buf;
  write_realization(buf, r);
  CHECK(buf.str().size() == 8 + 12 + 16 * (2 * 9 + 2 * 9 + 2 * 2 * 9));
  const auto back = read_realization(buf);
  CHECK(back.ris_cn == r.ris_cn);
  CHECK(back.sensor_ris == r.sensor_ris);
  CHECK(back.cascaded == r.cascaded);
  std::stringstream bad("NOTMAGIC");
  CHECK_THROWS(read_realization(bad));
}
