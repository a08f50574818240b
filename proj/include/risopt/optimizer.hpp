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
#include <string>
#include <vector>

#include "risopt/conic.hpp"
#include "risopt/fblr.hpp"
#include "risopt/rng.hpp"
#include "risopt/surrogate.hpp"

namespace risopt {

enum class InitMode { all_ones, random };

struct ScoSettings {
  int max_iters = 50;
  double rel_tol = 1e-4;
  int randomization_samples = 200;
  InitMode init_mode = InitMode::all_ones;
  std::uint64_t seed = 1;
  double guard_rel = 1e-8;
  conic::IpmOptions ipm;

  void validate() const;
};

struct OptimizeOutcome {
  RisResponse psi_star;
  double wsr_value = 0.0;              // clamped WSR on the estimated channels
  std::vector<double> relaxed_trace;   // index 0 is the starting point
  std::vector<double> rate_trace;      // per iteration/sweep objective for convergence plots
  int iters_used = 0;
  std::vector<double> iteration_time_s;
  long long evaluations = 0;
  std::vector<std::string> events;
};

/// Candidate ranking: clamped WSR first, unclamped WSR to break ties.
struct WsrScore {
  double clamped = 0.0;
  double unclamped = 0.0;

  bool better_than(const WsrScore& other) const;
};

WsrScore score_mrc(const SystemModel& sys, const FblrParams& params, const CVector& psi);

OptimizeOutcome sco_optimize(const SystemModel& sys, const FblrParams& params, const ScoSettings& settings);

RisResponse gaussian_randomize(const CMatrix& phi, const SystemModel& sys, const FblrParams& params, int samples,
                               Rng& rng);

struct AoSettings {
  int grid_points = 64;
  int max_sweeps = 20;
};

OptimizeOutcome ao_optimize(const SystemModel& sys, const FblrParams& params, const AoSettings& settings = {});

RisResponse ro_baseline(int num_ris, Rng& rng);

}  // namespace risopt
