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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "risopt/channel.hpp"
#include "risopt/estimation.hpp"
#include "risopt/optimizer.hpp"
#include "risopt/scenario.hpp"

namespace risopt {

enum class Method { sco, ao, ro };

std::string to_string(Method m);
Method parse_method(const std::string& text);

struct RunOptions {
  Method method = Method::sco;
  ScoSettings sco;
  AoSettings ao;
  bool non_robust = false;  // optimize as if C~ = 0
  bool reuse_psi = false;   // design once from channel statistics
  int threads = 0;          // 0: hardware concurrency
};

/// Everything one Monte-Carlo draw produces before optimization.
struct Realization {
  std::vector<Eigen::Vector3d> sensors;
  std::vector<ChannelPrior> priors;
  ChannelRealization truth;
  ChannelEstimate estimate;
  SystemModel estimated;  // estimated channels with true error covariance
  FblrParams params;
};

std::vector<double> penalty_coefficients(const ScenarioConfig& cfg);
FblrParams make_params(const ScenarioConfig& cfg, const SystemModel& sys);

Realization draw_realization(const ScenarioConfig& cfg, std::uint64_t index);

/// Distribution-only model: Hhat = prior mean, C~ = sum_j P_j C_j.
SystemModel statistical_model(const ScenarioConfig& cfg, std::span<const ChannelPrior> priors);

struct RealizationOutcome {
  int realization = 0;
  bool ok = false;
  std::string error;
  double wsr_est = 0.0;
  double wsr_true = 0.0;
  int iters = 0;
  std::vector<double> iteration_time_s;
  std::vector<double> trace;
  std::vector<std::string> events;
  CVector psi;

  double mean_iteration_ms() const;
};

OptimizeOutcome optimize(const SystemModel& sys, const FblrParams& params, const RunOptions& options,
                         std::uint64_t seed, std::uint64_t realization);

RealizationOutcome run_realization(const ScenarioConfig& cfg, int index, const RunOptions& options);

std::vector<RealizationOutcome> run_monte_carlo(const ScenarioConfig& cfg, const RunOptions& options);

// Runs fn(i) for i in [0, n) on a pool; results land in slot order.
template <class T, class Fn>
std::vector<T> parallel_map(int n, int threads, Fn fn);

enum class SweepVariable { K, L };

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& text);

struct SweepSpec {
  SweepVariable variable = SweepVariable::L;
  std::vector<int> values;
  std::vector<Method> methods;
  WeightPolicy weight_policy = WeightPolicy::equal;
  int realizations = 1;
  ScenarioConfig base;
  RunOptions options;

  void validate() const;
};

struct SweepRow {
  Method method = Method::sco;
  SweepVariable variable = SweepVariable::L;
  int value = 0;
  std::uint64_t seed = 0;
  int realization = 0;
  bool ok = false;
  double wsr_est = 0.0;
  double wsr_true = 0.0;
  int iters = 0;
  double wall_ms_per_iter = 0.0;
  std::string trace_ref;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::map<std::string, std::vector<double>> traces;
  std::vector<std::string> events;
};

ScenarioConfig sweep_point_config(const SweepSpec& spec, int value);
SweepResult run_sweep(const SweepSpec& spec);

struct MeanCi {
  int n = 0;
  double mean = 0.0;
  double half_width = 0.0;  // 95% normal approximation
};

MeanCi mean_ci(const std::vector<double>& samples);

struct PointSummary {
  Method method = Method::sco;
  int value = 0;
  int failed = 0;
  MeanCi wsr_est, wsr_true, iters, wall_ms;
};

std::vector<PointSummary> summarize(const SweepResult& result);

/// tol_k = |obj_k - obj_final| / |obj_final|
std::vector<double> convergence_trace(const std::vector<double>& objective);
/// First k after which every tolerance stays <= threshold.
int iterations_to_tolerance(const std::vector<double>& tolerance, double threshold);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct TimingEntry {
  Method method = Method::sco;
  int num_ris = 0;
  int samples = 0;
  double mean_ms = 0.0;
};

struct TimingReport {
  std::vector<TimingEntry> entries;
  std::map<Method, LogLogFit> growth;  // when >= 2 distinct L values
};

/// rows with variable L; K sweeps are reported against the fixed L.
TimingReport timing_report(const SweepResult& result, const ScenarioConfig& base);

void write_results_csv(const SweepResult& result, std::ostream& out);
void write_trace_csv(const std::vector<double>& objective, std::ostream& out);
void write_timing_csv(const TimingReport& report, std::ostream& out);
void write_summary(const SweepSpec& spec, const SweepResult& result, const TimingReport& timing, std::ostream& out);

/// Checks the row count and row schema; returns a list of violations.
std::vector<std::string> check_invariants(const SweepSpec& spec, const SweepResult& result);

}  // namespace risopt

#include "risopt/detail/parallel.hpp"
