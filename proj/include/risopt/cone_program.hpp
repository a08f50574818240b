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
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "risopt/types.hpp"

namespace risopt::conic {

/// Cone layout of the slack vector, in order: nonnegative orthant, then
/// second-order cones {s0 >= ||s1||}, then PSD blocks stored as full
/// column-major p x p matrices.
struct ConeDims {
  int nonneg = 0;
  std::vector<int> soc;
  std::vector<int> psd;

  Eigen::Index rows() const;
  int degree() const;
  int cone_count() const { return nonneg + static_cast<int>(soc.size() + psd.size()); }
};

/// minimize c'x  s.t.  G x + s = h,  s in K.
struct ConeProgram {
  RVector c;
  Eigen::SparseMatrix<double> G;
  RVector h;
  ConeDims dims;

  Eigen::Index num_vars() const { return c.size(); }
};

enum class SolveStatus { optimal, near_optimal, infeasible, numerical_failure };

std::string to_string(SolveStatus status);

struct IpmOptions {
  int max_iters = 100;
  double feastol = 1e-8;
  double abstol = 1e-10;
  double reltol = 1e-8;
  double near_feastol = 1e-6;
  double near_reltol = 1e-6;
  double step_fraction = 0.99;
  int refinement_steps = 1;
};

struct IpmResult {
  RVector x, s, z;
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Primal-dual path-following method with Nesterov-Todd scaling and a
/// Mehrotra predictor-corrector, solved through the normal equations.
IpmResult solve_interior_point(const ConeProgram& program, const IpmOptions& options = {});

/// Anything that handles {nonneg, SOC, PSD} cones and returns dual
/// certificates can sit behind this interface.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual IpmResult solve(const ConeProgram& program, const IpmOptions& options) const = 0;
  virtual std::string name() const = 0;
};

class InteriorPointBackend final : public ConicBackend {
 public:
  IpmResult solve(const ConeProgram& program, const IpmOptions& options) const override {
    return solve_interior_point(program, options);
  }
  std::string name() const override { return "ipm"; }
};

/// Cone-wise checks on a slack or multiplier vector.
double min_cone_margin(const RVector& s, const ConeDims& dims);

/// Text dump for cross-solver debugging:
///   conic-triplets 1
///   dims <n> <rows> <nonneg> <nsoc> <soc sizes...> <npsd> <psd orders...>
///   c <n values>
///   h <rows values>
///   G <nnz>
///   <row> <col> <value>   (one line per nonzero, 0-based)
void write_triplets(const ConeProgram& program, std::ostream& out);
ConeProgram read_triplets(std::istream& in);

}  // namespace risopt::conic
