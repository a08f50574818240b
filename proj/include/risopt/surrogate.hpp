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

#include <vector>

#include "risopt/fblr.hpp"
#include "risopt/types.hpp"

namespace risopt {

enum class BoundForm { single, multi };

/// Raised when an expansion point makes a bound undefined (zero signal trace).
class DegenerateExpansion : public Error {
 public:
  using Error::Error;
};

/// Per-sensor matrices the bounds are built from. The single form uses
/// Pi_i = P_i h_i^H h_i and Pi~_i = c~ I + sum_{j!=i} P_j h_j^H h_j; the multi
/// form uses the lifted Xi/Lambda objects plus B_i = C~^{1/2} H_i, so that
/// tr(Phi Lambda_i Phi) = ||B_i Phi||_F^2.
struct SurrogateModel {
  BoundForm form = BoundForm::multi;
  int num_ris = 0;
  LiftedSystem lifted;
  std::vector<CMatrix> pi, pi_tilde, pi_bar;
  std::vector<CMatrix> err_factor;
  FblrParams params;

  int num_sensors() const { return static_cast<int>(params.weights.size()); }
  double noise_var() const { return lifted.noise_var; }
};

SurrogateModel make_surrogate_model(const SystemModel& sys, const FblrParams& params);
SurrogateModel make_surrogate_model(const SystemModel& sys, const FblrParams& params, BoundForm form);

/// SINR of the relaxed problem in the model's form.
double relaxed_sinr(const SurrogateModel& model, int sensor, const CMatrix& phi);
std::vector<double> relaxed_sinr(const SurrogateModel& model, const CMatrix& phi);
double relaxed_wsr(const SurrogateModel& model, const CMatrix& phi);  // unclamped

struct ExpansionPoint {
  CMatrix phi;
  BoundForm form = BoundForm::multi;
  std::vector<double> rho, cap, disp;
  // single form: x = tr(Pi Phi), y = s2 + tr(Pi~ Phi), s = s2 + tr(Pi_bar Phi)
  std::vector<double> x, y, s;
  // multi form
  std::vector<double> t_xi, t_total;
  std::vector<CMatrix> t_grad;
};

ExpansionPoint make_expansion(const SurrogateModel& model, const CMatrix& phi);

double t_total(const LiftedSystem& sys, int sensor, const CMatrix& phi);
CMatrix t_gradient(const LiftedSystem& sys, int sensor, const CMatrix& phi);
double t_tilde(const ExpansionPoint& exp, int sensor, const CMatrix& phi);

double capacity_lb_single(const SurrogateModel& model, const ExpansionPoint& exp, int sensor,
                          const CMatrix& phi);
double dispersion_ub_single(const SurrogateModel& model, const ExpansionPoint& exp, int sensor,
                            const CMatrix& phi);
double capacity_lb_multi(const SurrogateModel& model, const ExpansionPoint& exp, int sensor,
                         const CMatrix& phi);
double dispersion_ub_multi(const SurrogateModel& model, const ExpansionPoint& exp, int sensor,
                           const CMatrix& phi);

double capacity_lb(const SurrogateModel& model, const ExpansionPoint& exp, int sensor, const CMatrix& phi);
double dispersion_ub(const SurrogateModel& model, const ExpansionPoint& exp, int sensor, const CMatrix& phi);

double surrogate_wsr(const SurrogateModel& model, const ExpansionPoint& exp, const CMatrix& phi);

// Coefficient bundle over the packed Hermitian parameters x = pack(Phi).

struct AffineForm {
  RVector coef;
  double offset = 0.0;

  double operator()(const RVector& x) const { return coef.dot(x) + offset; }
};

/// + weight * sqrt(arg)
struct SqrtTerm {
  double weight = 0.0;
  AffineForm arg;
};

/// - weight * sum(num_k^2) / den,  den > 0
struct QuadOverLinTerm {
  double weight = 0.0;
  std::vector<AffineForm> num;
  AffineForm den;
};

/// - weight * (linear + sum(squares_k^2))
struct QuadTerm {
  double weight = 0.0;
  AffineForm linear;
  std::vector<AffineForm> squares;
};

struct SurrogateBundle {
  int num_ris = 0;
  double constant = 0.0;
  AffineForm linear;
  std::vector<SqrtTerm> sqrt_terms;
  std::vector<QuadOverLinTerm> qol_terms;
  std::vector<QuadTerm> quad_terms;
  std::vector<AffineForm> guards;  // each >= 0

  double evaluate(const CMatrix& phi) const;
  double evaluate_packed(const RVector& x) const;
  std::size_t term_count() const { return sqrt_terms.size() + qol_terms.size() + quad_terms.size(); }
};

/// Guards keep T~_i >= guard_rel * T_i(Phi_prev) in the multi form.
SurrogateBundle build_bundle(const SurrogateModel& model, const ExpansionPoint& exp, double guard_rel = 1e-8);

}  // namespace risopt
