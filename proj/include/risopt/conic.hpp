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
#include <memory>

#include "risopt/cone_program.hpp"
#include "risopt/surrogate.hpp"

namespace risopt::conic {

/// Column bookkeeping for a lowered surrogate subproblem. The first
/// param_count(L) variables are the packed Hermitian parameters of Phi.
struct RisSubproblem {
  ConeProgram program;
  int num_ris = 0;
  double constant = 0.0;  // objective = constant - c'x
  Eigen::Index num_phi_vars = 0;
  int diag_rows = 0;
  int guard_rows = 0;
};

/// center (packed Phi, optional) is where the cone factors are balanced;
/// the feasible set does not depend on it.
RisSubproblem build_subproblem(const SurrogateBundle& bundle, const RVector* center = nullptr);

struct SolveReport {
  CMatrix phi_star;
  double objective_value = 0.0;  // bundle evaluated at phi_star
  double solver_objective = 0.0; // constant - primal objective
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
  double wall_time_s = 0.0;
  double gap = 0.0;
};

/// Solves with the given backend, retrying once with relaxed tolerances.
SolveReport solve(const RisSubproblem& sub, const SurrogateBundle& bundle, const ConicBackend& backend,
                  const IpmOptions& options = {});
SolveReport solve(const RisSubproblem& sub, const SurrogateBundle& bundle);

}  // namespace risopt::conic
