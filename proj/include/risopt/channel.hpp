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

#include <iosfwd>
#include <vector>

#include "risopt/rng.hpp"
#include "risopt/scenario.hpp"
#include "risopt/types.hpp"

namespace risopt {

/// Element coordinates. The CN carries a half-wavelength ULA along x
/// centred on its position; the RIS is a sqrt(L) x sqrt(L) half-wavelength
/// UPA in the x = const plane (spanning y and z) centred on its position.
/// RIS element l = row * side + column, row along z, column along y.
struct ArrayGeometry {
  std::vector<Eigen::Vector3d> cn_elements;
  std::vector<Eigen::Vector3d> ris_elements;
  std::vector<Eigen::Vector3d> sensors;
};

ArrayGeometry build_geometry(const ScenarioConfig& cfg, std::vector<Eigen::Vector3d> sensors);

/// Unit-modulus LoS responses from the exact element-to-element distance.
struct LosGeometry {
  CMatrix cn_steering;                   // K x L
  std::vector<CVector> sensor_steering;  // M vectors of length L
};

/// Spherical-wavefront phase exp(-j 2 pi d / lambda).
Complex los_phase(double distance_m, double wavelength_m);

LosGeometry los_response(const ScenarioConfig& cfg, const ArrayGeometry& geometry);

double ris_cn_distance(const ArrayGeometry& geometry);
std::vector<double> sensor_ris_distances(const ArrayGeometry& geometry);

/// One coherence draw of the true channels.
struct ChannelRealization {
  CMatrix ris_cn;                  // G, K x L
  std::vector<CVector> sensor_ris; // g_i, length L
  std::vector<CMatrix> cascaded;   // H_i = G diag(g_i)
};

/// Independent substreams: one for the RIS->CN link and one per sensor.
struct ChannelStreams {
  Rng ris_cn;
  std::vector<Rng> sensors;
};

ChannelStreams make_channel_streams(std::uint64_t seed, std::uint64_t realization, int num_sensors);

ChannelRealization draw_channels(const ScenarioConfig& cfg, const LargeScale& ls,
                                 const LosGeometry& los, ChannelStreams& streams);

/// H = G diag(g).
CMatrix cascade(const CMatrix& ris_cn, const CVector& sensor_ris);

/// Little-endian dump: magic "RISCHAN1", then int32 K, L, M, followed by G
/// (column-major), each g_i, and each H_i (column-major), every complex
/// entry as interleaved re/im float64.
void write_realization(std::ostream& out, const ChannelRealization& realization);
ChannelRealization read_realization(std::istream& in);

}  // namespace risopt
