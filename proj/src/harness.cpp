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


#include "risopt/harness.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace risopt {

std::string to_string(Method m) {
  switch (m) {
    case Method::sco: return "sco";
    case Method::ao: return "ao";
    case Method::ro: return "ro";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "sco") return Method::sco;
  if (text == "ao") return Method::ao;
  if (text == "ro") return Method::ro;
  throw ConfigError("unknown method '" + text + "' (expected sco, ao or ro)");
}

std::string to_string(SweepVariable v) { return v == SweepVariable::K ? "K" : "L"; }

SweepVariable parse_sweep_variable(const std::string& text) {
  if (text == "K" || text == "k") return SweepVariable::K;
  if (text == "L" || text == "l") return SweepVariable::L;
  throw ConfigError("unknown sweep variable '" + text + "' (expected K or L)");
}

std::vector<double> penalty_coefficients(const ScenarioConfig& cfg) {
  std::vector<double> a;
  for (int i = 0; i < cfg.num_sensors; ++i) {
    const auto k = static_cast<size_t>(i);
    a.push_back(penalty_coeff(cfg.blocklength.at(k), cfg.error_prob.at(k)));
  }
  return a;
}

FblrParams make_params(const ScenarioConfig& cfg, const SystemModel& sys) {
  FblrParams p;
  p.penalty = penalty_coefficients(cfg);
  if (cfg.weight_policy == WeightPolicy::fair) p.weights = fairness_weights(sys);
  else p.weights.assign(static_cast<size_t>(cfg.num_sensors), 1.0);
  return p;
}

namespace {

struct Geometry {
  std::vector<Eigen::Vector3d> sensors;
  LosGeometry los;
  LargeScale large_scale;
  std::vector<ChannelPrior> priors;
};

Geometry make_geometry(const ScenarioConfig& cfg, std::uint64_t index) {
  Geometry g;
  Rng place = make_stream(cfg.seed, index, StreamPurpose::placement);
  g.sensors = place_sensors(cfg, place);
  const ArrayGeometry arr = build_geometry(cfg, g.sensors);
  g.los = los_response(cfg, arr);
  const auto d_sensor = sensor_ris_distances(arr);
  g.large_scale = derive_large_scale(cfg, ris_cn_distance(arr), d_sensor);
  for (int i = 0; i < cfg.num_sensors; ++i) g.priors.push_back(channel_prior(cfg, g.large_scale, g.los, i));
  return g;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void evaluate(const Realization& rz, const CVector& psi, RealizationOutcome& out) {
  out.psi = psi;
  out.wsr_est = score_mrc(rz.estimated, rz.params, psi).clamped;
  const auto rho = sinr_true_mrc(rz.truth.cascaded, rz.estimate.h_hat, rz.estimated.power,
                                 rz.estimated.noise_var, psi);
  out.wsr_true = wsr(rho, rz.params.penalty, rz.params.weights);
  if (!std::isfinite(out.wsr_est) || !std::isfinite(out.wsr_true)) throw Error("non-finite WSR");
  if (psi.cwiseAbs().maxCoeff() > 1.0 + 1e-12) throw Error("reflection response violates |psi| <= 1");
}

void attach(const OptimizeOutcome& o, RealizationOutcome& out) {
  out.iters = o.iters_used;
  out.iteration_time_s = o.iteration_time_s;
  out.trace = o.rate_trace;
  out.events = o.events;
}

}  // namespace

Realization draw_realization(const ScenarioConfig& cfg, std::uint64_t index) {
  Geometry g = make_geometry(cfg, index);
  Realization rz;
  rz.sensors = g.sensors;
  rz.priors = g.priors;
  ChannelStreams streams = make_channel_streams(cfg.seed, index, cfg.num_sensors);
  rz.truth = draw_channels(cfg, g.large_scale, g.los, streams);
  std::vector<Rng> pilots;
  for (int i = 0; i < cfg.num_sensors; ++i)
    pilots.push_back(make_stream(cfg.seed, index, StreamPurpose::pilot, static_cast<std::uint64_t>(i)));
  rz.estimate = estimate_channels(rz.truth, cfg, rz.priors, pilots);
  rz.estimated.channels = rz.estimate.h_hat;
  rz.estimated.c_tilde = rz.estimate.c_tilde;
  rz.estimated.power = cfg.tx_power_w();
  rz.estimated.noise_var = cfg.noise_var();
  rz.params = make_params(cfg, rz.estimated);
  return rz;
}

SystemModel statistical_model(const ScenarioConfig& cfg, std::span<const ChannelPrior> priors) {
  SystemModel sys;
  sys.power = cfg.tx_power_w();
  sys.noise_var = cfg.noise_var();
  const Eigen::Index k = cfg.num_antennas;
  sys.c_tilde = CMatrix::Zero(k, k);
  for (size_t j = 0; j < priors.size(); ++j) {
    sys.channels.push_back(priors[j].mean.reshaped(k, cfg.num_ris));
    sys.c_tilde += sys.power[j] * priors[j].cov_block;
  }
  return sys;
}

double RealizationOutcome::mean_iteration_ms() const { return 1e3 * mean_of(iteration_time_s); }

OptimizeOutcome optimize(const SystemModel& sys, const FblrParams& params, const RunOptions& options,
                         std::uint64_t seed, std::uint64_t realization) {
  switch (options.method) {
    case Method::sco: {
      ScoSettings s = options.sco;
      s.seed = derive_seed(seed, realization, StreamPurpose::optimizer);
      return sco_optimize(sys, params, s);
    }
    case Method::ao: return ao_optimize(sys, params, options.ao);
    case Method::ro: {
      Rng rng = make_stream(seed, realization, StreamPurpose::random_phase);
      OptimizeOutcome o;
      o.psi_star = ro_baseline(sys.num_ris(), rng);
      o.wsr_value = score_mrc(sys, params, o.psi_star.psi).clamped;
      o.rate_trace = {o.wsr_value};
      o.evaluations = 1;
      return o;
    }
  }
  throw Error("unknown method");
}

RealizationOutcome run_realization(const ScenarioConfig& cfg, int index, const RunOptions& options) {
  RealizationOutcome out;
  out.realization = index;
  try {
    const Realization rz = draw_realization(cfg, static_cast<std::uint64_t>(index));
    SystemModel design = rz.estimated;
    if (options.non_robust) design.c_tilde.setZero();
    const OptimizeOutcome o = optimize(design, rz.params, options, cfg.seed, static_cast<std::uint64_t>(index));
    attach(o, out);
    evaluate(rz, o.psi_star.psi, out);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

std::vector<RealizationOutcome> run_monte_carlo(const ScenarioConfig& cfg, const RunOptions& options) {
  validate(cfg);
  const int n = cfg.mc_realizations;
  if (!options.reuse_psi) {
    return parallel_map<RealizationOutcome>(n, options.threads,
                                            [&](int r) { return run_realization(cfg, r, options); });
  }
  // One design from the channel distribution at fixed positions.
  ScenarioConfig fixed = cfg;
  const Geometry g = make_geometry(cfg, 0);
  fixed.positions.sensors = g.sensors;
  OptimizeOutcome design;
  std::string design_error;
  try {
    SystemModel stat = statistical_model(fixed, g.priors);
    if (options.non_robust) stat.c_tilde.setZero();
    FblrParams params = make_params(fixed, statistical_model(fixed, g.priors));
    design = optimize(stat, params, options, cfg.seed, 0);
  } catch (const std::exception& e) {
    design_error = e.what();
  }
  return parallel_map<RealizationOutcome>(n, options.threads, [&](int r) {
    RealizationOutcome out;
    out.realization = r;
    if (!design_error.empty()) {
      out.error = design_error;
      return out;
    }
    try {
      const Realization rz = draw_realization(fixed, static_cast<std::uint64_t>(r));
      attach(design, out);
      evaluate(rz, design.psi_star.psi, out);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  });
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep: values must be nonempty");
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 1) throw ConfigError("sweep: values must be positive");
    if (i > 0 && values[i] <= values[i - 1]) throw ConfigError("sweep: values must be strictly increasing");
    if (variable == SweepVariable::L) {
      const int side = static_cast<int>(std::lround(std::sqrt(values[i])));
      if (side * side != values[i]) throw ConfigError("sweep: L values must be perfect squares");
    }
  }
  if (methods.empty()) throw ConfigError("sweep: at least one method required");
  if (realizations < 1) throw ConfigError("sweep: realizations must be >= 1");
}

ScenarioConfig sweep_point_config(const SweepSpec& spec, int value) {
  ScenarioConfig cfg = spec.base;
  if (spec.variable == SweepVariable::K) cfg.num_antennas = value;
  else cfg.num_ris = value;
  cfg.weight_policy = spec.weight_policy;
  cfg.mc_realizations = spec.realizations;
  validate(cfg);
  return cfg;
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult res;
  for (int value : spec.values) {
    const ScenarioConfig cfg = sweep_point_config(spec, value);
    for (Method m : spec.methods) {
      RunOptions opt = spec.options;
      opt.method = m;
      const auto outcomes = run_monte_carlo(cfg, opt);
      for (const auto& o : outcomes) {
        SweepRow row;
        row.method = m;
        row.variable = spec.variable;
        row.value = value;
        row.seed = cfg.seed;
        row.realization = o.realization;
        row.ok = o.ok;
        row.wsr_est = o.wsr_est;
        row.wsr_true = o.wsr_true;
        row.iters = o.iters;
        row.wall_ms_per_iter = o.mean_iteration_ms();
        row.error = o.error;
        std::ostringstream ref;
        ref << to_string(m) << '_' << to_string(spec.variable) << value << "_r" << o.realization;
        row.trace_ref = ref.str();
        if (o.ok) res.traces[row.trace_ref] = o.trace;
        for (const auto& e : o.events) res.events.push_back(row.trace_ref + ": " + e);
        if (!o.ok) res.events.push_back(row.trace_ref + ": failed: " + o.error);
        res.rows.push_back(std::move(row));
      }
    }
  }
  return res;
}

MeanCi mean_ci(const std::vector<double>& samples) {
  MeanCi ci;
  ci.n = static_cast<int>(samples.size());
  if (ci.n == 0) return ci;
  ci.mean = mean_of(samples);
  if (ci.n > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - ci.mean) * (x - ci.mean);
    ci.half_width = 1.959963984540054 * std::sqrt(ss / (ci.n - 1) / ci.n);
  }
  return ci;
}

std::vector<PointSummary> summarize(const SweepResult& result) {
  std::vector<std::pair<Method, int>> keys;
  for (const auto& r : result.rows) {
    const std::pair<Method, int> k{r.method, r.value};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  std::vector<PointSummary> out;
  for (const auto& [m, v] : keys) {
    PointSummary s;
    s.method = m;
    s.value = v;
    std::vector<double> est, tru, it, ms;
    for (const auto& r : result.rows) {
      if (r.method != m || r.value != v) continue;
      if (!r.ok) {
        ++s.failed;
        continue;
      }
      est.push_back(r.wsr_est);
      tru.push_back(r.wsr_true);
      it.push_back(r.iters);
      if (r.iters > 0) ms.push_back(r.wall_ms_per_iter);
    }
    s.wsr_est = mean_ci(est);
    s.wsr_true = mean_ci(tru);
    s.iters = mean_ci(it);
    s.wall_ms = mean_ci(ms);
    out.push_back(s);
  }
  return out;
}

std::vector<double> convergence_trace(const std::vector<double>& objective) {
  if (objective.empty()) throw Error("convergence_trace: empty objective series");
  const double last = objective.back();
  const double denom = std::max(std::abs(last), 1e-300);
  std::vector<double> tol;
  for (double v : objective) tol.push_back(std::abs(v - last) / denom);
  return tol;
}

int iterations_to_tolerance(const std::vector<double>& tolerance, double threshold) {
  int k = static_cast<int>(tolerance.size()) - 1;
  while (k > 0 && tolerance[static_cast<size_t>(k - 1)] <= threshold) --k;
  return std::max(k, 0);
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("fit_loglog: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("fit_loglog: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw Error("fit_loglog: degenerate abscissae");
  LogLogFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

TimingReport timing_report(const SweepResult& result, const ScenarioConfig& base) {
  TimingReport rep;
  std::map<std::pair<Method, int>, std::vector<double>> groups;
  for (const auto& r : result.rows) {
    if (!r.ok || r.iters <= 0) continue;
    const int l = r.variable == SweepVariable::L ? r.value : base.num_ris;
    groups[{r.method, l}].push_back(r.wall_ms_per_iter);
  }
  std::map<Method, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const auto& [key, v] : groups) {
    TimingEntry e;
    e.method = key.first;
    e.num_ris = key.second;
    e.samples = static_cast<int>(v.size());
    e.mean_ms = mean_of(v);
    rep.entries.push_back(e);
    if (e.mean_ms > 0.0) {
      series[e.method].first.push_back(e.num_ris);
      series[e.method].second.push_back(e.mean_ms);
    }
  }
  for (const auto& [m, xy] : series)
    if (xy.first.size() >= 2) rep.growth[m] = fit_loglog(xy.first, xy.second);
  return rep;
}

void write_results_csv(const SweepResult& result, std::ostream& out) {
  out << "method,variable,value,seed,realization,status,wsr_est,wsr_true,iters,wall_ms_per_iter,trace_ref\n";
  out << std::setprecision(10);
  for (const auto& r : result.rows) {
    out << to_string(r.method) << ',' << to_string(r.variable) << ',' << r.value << ',' << r.seed << ','
        << r.realization << ',' << (r.ok ? "ok" : "failed") << ',' << r.wsr_est << ',' << r.wsr_true << ','
        << r.iters << ',' << r.wall_ms_per_iter << ',' << r.trace_ref << '\n';
  }
}

void write_trace_csv(const std::vector<double>& objective, std::ostream& out) {
  out << "iteration,objective,tolerance\n";
  out << std::setprecision(15);
  if (objective.empty()) return;
  const auto tol = convergence_trace(objective);
  for (size_t k = 0; k < objective.size(); ++k) out << k << ',' << objective[k] << ',' << tol[k] << '\n';
}

void write_timing_csv(const TimingReport& report, std::ostream& out) {
  out << "method,l,samples,mean_ms_per_iter\n";
  out << std::setprecision(10);
  for (const auto& e : report.entries)
    out << to_string(e.method) << ',' << e.num_ris << ',' << e.samples << ',' << e.mean_ms << '\n';
}

void write_summary(const SweepSpec& spec, const SweepResult& result, const TimingReport& timing,
                   std::ostream& out) {
  out << "sweep " << to_string(spec.variable) << " weights " << to_string(spec.weight_policy) << " realizations "
      << spec.realizations << " seed " << spec.base.seed << (spec.options.non_robust ? " non-robust" : "")
      << (spec.options.reuse_psi ? " reuse-psi" : "") << "\n\n";
  out << std::fixed << std::setprecision(4);
  out << "method value n failed wsr_est(+-95%) wsr_true(+-95%) iters ms/iter\n";
  for (const auto& s : summarize(result)) {
    out << to_string(s.method) << ' ' << s.value << ' ' << s.wsr_est.n << ' ' << s.failed << ' ' << s.wsr_est.mean
        << " +- " << s.wsr_est.half_width << ' ' << s.wsr_true.mean << " +- " << s.wsr_true.half_width << ' '
        << s.iters.mean << ' ' << s.wall_ms.mean << '\n';
  }
  if (!timing.growth.empty()) {
    out << "\nlog-log growth of time per iteration in L\n";
    for (const auto& [m, f] : timing.growth) out << to_string(m) << " slope " << f.slope << '\n';
  }
  if (!result.events.empty()) {
    out << "\nevents\n";
    for (const auto& e : result.events) out << e << '\n';
  }
}

std::vector<std::string> check_invariants(const SweepSpec& spec, const SweepResult& result) {
  std::vector<std::string> bad;
  const size_t expect = spec.values.size() * spec.methods.size() * static_cast<size_t>(spec.realizations);
  if (result.rows.size() != expect) {
    bad.push_back("row count " + std::to_string(result.rows.size()) + " != " + std::to_string(expect));
  }
  for (const auto& r : result.rows) {
    if (!r.ok) {
      bad.push_back(r.trace_ref + " failed: " + r.error);
      continue;
    }
    if (!std::isfinite(r.wsr_est) || r.wsr_est < 0.0 || !std::isfinite(r.wsr_true) || r.wsr_true < 0.0)
      bad.push_back(r.trace_ref + ": WSR not finite and nonnegative");
  }
  return bad;
}

}  // namespace risopt
