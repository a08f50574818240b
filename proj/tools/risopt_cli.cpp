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


#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risopt/harness.hpp"

namespace fs = std::filesystem;
using namespace risopt;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

std::vector<int> parse_values(const std::string& text) {
  std::vector<int> v;
  for (const auto& p : split(text, ',')) {
    try {
      size_t used = 0;
      const int x = std::stoi(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
      v.push_back(x);
    } catch (const std::exception&) {
      throw ConfigError("--values: '" + p + "' is not an integer");
    }
  }
  return v;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

int run(const std::string& config_path, const std::string& methods, const std::string& sweep,
        const std::string& values, const std::string& weights, const std::string& seed, const fs::path& out_dir,
        bool non_robust, bool reuse_psi, int threads) {
  SweepSpec spec;
  spec.base = load_config(config_path);
  if (!seed.empty()) spec.base.seed = std::stoull(seed);
  spec.weight_policy = weights.empty() ? spec.base.weight_policy : parse_weight_policy(weights);
  spec.realizations = spec.base.mc_realizations;
  for (const auto& m : split(methods, ',')) spec.methods.push_back(parse_method(m));
  if (sweep.empty()) {
    spec.variable = SweepVariable::L;
    spec.values = {spec.base.num_ris};
    if (!values.empty()) throw ConfigError("--values needs --sweep");
  } else {
    spec.variable = parse_sweep_variable(sweep);
    spec.values = values.empty()
                      ? std::vector<int>{spec.variable == SweepVariable::K ? spec.base.num_antennas : spec.base.num_ris}
                      : parse_values(values);
  }
  spec.options.non_robust = non_robust;
  spec.options.reuse_psi = reuse_psi;
  spec.options.threads = threads;
  spec.validate();

  const SweepResult result = run_sweep(spec);
  const TimingReport timing = timing_report(result, spec.base);

  fs::create_directories(out_dir);
  std::ostringstream csv, tcsv, summary;
  write_results_csv(result, csv);
  write_file(out_dir / "results.csv", csv.str());
  for (const auto& [ref, trace] : result.traces) {
    std::ostringstream t;
    write_trace_csv(trace, t);
    write_file(out_dir / ("trace_" + ref + ".csv"), t.str());
  }
  write_timing_csv(timing, tcsv);
  write_file(out_dir / "timing.csv", tcsv.str());
  write_summary(spec, result, timing, summary);
  write_file(out_dir / "summary.txt", summary.str());
  std::cout << summary.str();

  const auto bad = check_invariants(spec, result);
  for (const auto& b : bad) std::cerr << "invariant: " << b << '\n';
  return bad.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS reflection design for short-packet uplinks"};
  app.require_subcommand(1);
  auto* cmd = app.add_subcommand("run", "Monte-Carlo sweep of one or more methods");
  std::string config, method = "sco", sweep, values, weights, seed;
  std::string out = "out";
  bool non_robust = false, reuse_psi = false;
  int threads = 0;
  cmd->add_option("--config", config, "scenario file (key = value)")->required();
  cmd->add_option("--method", method, "sco, ao, ro or a comma list");
  cmd->add_option("--sweep", sweep, "K or L");
  cmd->add_option("--values", values, "comma-separated sweep values");
  cmd->add_option("--weights", weights, "equal or fair");
  cmd->add_option("--seed", seed, "master seed (u64)");
  cmd->add_option("--out", out, "output directory");
  cmd->add_flag("--non-robust", non_robust, "optimize as if the estimates were exact");
  cmd->add_flag("--reuse-psi", reuse_psi, "design once from channel statistics");
  cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  CLI11_PARSE(app, argc, argv);
  try {
    return run(config, method, sweep, values, weights, seed, out, non_robust, reuse_psi, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
