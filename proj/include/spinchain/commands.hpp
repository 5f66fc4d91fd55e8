// Copyright 2026 The spinchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPINCHAIN_COMMANDS_HPP
#define SPINCHAIN_COMMANDS_HPP

#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinchain/artifacts.hpp"
#include "spinchain/chain.hpp"
#include "spinchain/oracle.hpp"
#include "spinchain/runfile.hpp"
#include "spinchain/version.hpp"

namespace spinchain {

// Command bodies behind the CLI, written against RunFile so tests drive
// them directly. Each emits its artifacts plus run_meta.json and returns a
// process exit code: 0 ok, 1 failed check, 2 bad configuration.

struct CommandOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<std::filesystem::path> out_override;
  std::optional<int> postselect_m1;  // doubled units
  std::vector<int> lags{1, 2, 4, 8};
  bool lags_explicit = false;  // explicit out-of-range lags are errors; the default list adapts
  int threads = 1;
  double tolerance = 1e-9;  // oracle-check
  bool corrupt_kernel = false;  // oracle-check negative-path hook
  std::ostream *log = &std::cout;
};

namespace command_detail {

inline RunConfig effective_config(const RunFile &run, const CommandOptions &options) {
  RunConfig config = run.config;
  if (options.seed_override) config.seed = *options.seed_override;
  return config;
}

inline std::filesystem::path effective_out(const RunFile &run, const CommandOptions &options) {
  return options.out_override ? *options.out_override : run.output_dir;
}

inline bool is_mixing_channel(const ChannelSpec &spec) {
  return spec.kind == ChannelKind::CollectiveDepolarizing || spec.kind == ChannelKind::EpsilonPolarizing;
}

inline std::vector<int> effective_lags(const RunConfig &config, const CommandOptions &options) {
  if (options.lags_explicit) {
    for (int lag : options.lags) {
      if (lag < 1 || lag >= config.steps) {
        throw std::out_of_range("lag " + std::to_string(lag) + " needs steps >= " +
                                std::to_string(lag + 1));
      }
    }
    return options.lags;
  }
  std::vector<int> fitting;
  for (int lag : options.lags) {
    if (lag >= 1 && lag < config.steps) fitting.push_back(lag);
  }
  return fitting;
}

inline void write_run_meta(const std::filesystem::path &path, const RunFile &run,
                           const RunConfig &effective, const CommandOptions &options,
                           const std::string &command) {
  nlohmann::json meta;
  meta["engine_version"] = kEngineVersion;
  meta["command"] = command;
  meta["seed"] = effective.seed;
  meta["threads"] = options.threads;
  if (options.postselect_m1) {
    meta["postselect_m1"] = *options.postselect_m1;
  } else {
    meta["postselect_m1"] = nullptr;
  }
  meta["config"] = run.source;
  // The statistical model and its printed conventions, so downstream
  // analysis never has to guess signs.
  meta["model"] = "sector_markov_chain";
  meta["drift_sign_convention"] = "E[m'|m] = m*(1-alpha-beta) + (N/2)*(beta-alpha)";
  meta["closed_form_covariance"] =
      "N/4*(1-lambda)^lag + (eta_lag-1)*E1^2; exact for mixed-start mixing channels; NaN for "
      "product channels";
  auto out = open_artifact(path);
  out << meta.dump(2) << '\n';
}

}  // namespace command_detail

/// `sample`: trajectories.csv plus per-step empirical histograms.
inline int cmd_sample(const RunFile &run, const CommandOptions &options) {
  using namespace command_detail;
  RunConfig config = effective_config(run, options);
  if (config.trajectories < 1) {
    *options.log << "sample: config has trajectories = 0, nothing to do\n";
    return 2;
  }
  auto ctx = make_context(config);
  auto trajectories = run_trajectories(ctx, config.trajectories, options.threads, options.postselect_m1);
  const auto out_dir = effective_out(run, options);
  write_trajectories_csv(out_dir / "trajectories.csv", trajectories);
  for (int step = 1; step <= config.steps; ++step) {
    auto histogram = step_histogram(trajectories, config.ensemble_size, step);
    write_distribution_csv(out_dir / ("histogram_step" + std::to_string(step) + ".csv"), histogram,
                           "histogram step " + std::to_string(step));
  }
  write_run_meta(out_dir / "run_meta.json", run, config, options, "sample");
  *options.log << "sample: wrote " << trajectories.size() << " trajectories to " << out_dir.string()
               << "\n";
  return 0;
}

namespace command_detail {

inline std::vector<CovarianceRow> covariance_rows(const ChainContext &ctx,
                                                  const std::vector<int> &lags,
                                                  const CommandOptions &options) {
  const RunConfig &config = ctx.config;
  std::vector<Trajectory> trajectories;
  if (config.trajectories >= 2) {
    trajectories = run_trajectories(ctx, config.trajectories, options.threads);
  }
  auto first = predictive_distribution(ctx, 1);
  const double first_mean = moments(first).mean;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<CovarianceRow> rows;
  for (int lag : lags) {
    CovarianceRow row;
    row.lag = lag;
    row.r_exact = covariance(exact_joint_distribution(ctx, 1 + lag, 1));
    row.r_closed_form = is_mixing_channel(config.channel)
                            ? mixing_covariance_closed_form(config.ensemble_size, config.channel.lambda,
                                                            lag, first_mean)
                            : nan;
    if (!trajectories.empty()) {
      auto estimate = empirical_lag_covariance(trajectories, lag);
      row.r_empirical = estimate.value;
      row.std_error = estimate.std_error;
    } else {
      row.r_empirical = nan;
      row.std_error = nan;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace command_detail

/// `exact`: exact first-readout distribution, per-lag joints, covariance
/// table (all three routes).
inline int cmd_exact(const RunFile &run, const CommandOptions &options) {
  using namespace command_detail;
  RunConfig config = effective_config(run, options);
  auto ctx = make_context(config);
  const auto out_dir = effective_out(run, options);

  std::vector<int> lags;
  try {
    lags = effective_lags(config, options);
  } catch (const std::out_of_range &e) {
    *options.log << "exact: " << e.what() << "\n";
    return 2;
  }
  write_distribution_csv(out_dir / "distribution.csv", predictive_distribution(ctx, 1),
                         "first-readout distribution");
  for (int lag : lags) {
    write_joint_csv(out_dir / ("joint_" + std::to_string(lag) + ".csv"),
                    exact_joint_distribution(ctx, 1 + lag, 1));
  }
  write_covariance_csv(out_dir / "covariance.csv", covariance_rows(ctx, lags, options));
  write_run_meta(out_dir / "run_meta.json", run, config, options, "exact");
  *options.log << "exact: wrote distribution, " << lags.size() << " joints, covariance to "
               << out_dir.string() << "\n";
  return 0;
}

/// `covariance`: just the covariance table.
inline int cmd_covariance(const RunFile &run, const CommandOptions &options) {
  using namespace command_detail;
  RunConfig config = effective_config(run, options);
  auto ctx = make_context(config);
  const auto out_dir = effective_out(run, options);
  std::vector<int> lags;
  try {
    lags = effective_lags(config, options);
  } catch (const std::out_of_range &e) {
    *options.log << "covariance: " << e.what() << "\n";
    return 2;
  }
  write_covariance_csv(out_dir / "covariance.csv", covariance_rows(ctx, lags, options));
  write_run_meta(out_dir / "run_meta.json", run, config, options, "covariance");
  *options.log << "covariance: wrote " << lags.size() << " lags to " << out_dir.string() << "\n";
  return 0;
}

/// `oracle-check`: dense/sector equivalence over the full outcome tree.
inline int cmd_oracle_check(const RunFile &run, const CommandOptions &options) {
  using namespace command_detail;
  RunConfig config = effective_config(run, options);
  if (config.ensemble_size > 8) {
    *options.log << "oracle-check: refusing n = " << config.ensemble_size
                 << " (the dense engine is exponential; use n <= 8)\n";
    return 2;
  }
  if (config.steps > 4) {
    *options.log << "oracle-check: refusing steps = " << config.steps
                 << " (the full outcome tree is exponential; use steps <= 4)\n";
    return 2;
  }
  auto report = crosscheck(config, config.steps, options.tolerance, options.corrupt_kernel);

  nlohmann::json doc;
  doc["engine_version"] = kEngineVersion;
  doc["tolerance"] = report.tolerance;
  doc["rounds_run"] = report.rounds_run;
  doc["pass"] = report.pass;
  doc["max_total_variation"] = report.max_total_variation;
  doc["max_uniformity_deviation"] = report.max_uniformity_deviation;
  doc["rounds"] = nlohmann::json::array();
  for (const auto &round : report.rounds) {
    doc["rounds"].push_back({{"round", round.round},
                             {"max_total_variation", round.max_total_variation},
                             {"max_uniformity_deviation", round.max_uniformity_deviation}});
  }
  const auto out_dir = effective_out(run, options);
  auto out = open_artifact(out_dir / "oracle_report.json");
  out << doc.dump(2) << '\n';

  *options.log << "oracle-check: " << (report.pass ? "PASS" : "FAIL")
               << " max_tv=" << format_double(report.max_total_variation)
               << " max_uniformity_dev=" << format_double(report.max_uniformity_deviation) << "\n";
  return report.pass ? 0 : 1;
}

/// `validate-kernel`: constraint report for the configured readout kernel.
inline int cmd_validate_kernel(const RunFile &run, const CommandOptions &options) {
  using namespace command_detail;
  RunConfig config = effective_config(run, options);
  auto kernel = gaussian_kernel(config.ensemble_size, config.kernel_width);
  auto report = validate_kernel(kernel);
  auto &log = *options.log;
  log << "validate-kernel: n=" << config.ensemble_size << " w=" << config.kernel_width << "\n";
  log << "  columns stochastic: " << (report.columns_stochastic ? "yes" : "NO")
      << " (max column-sum error " << format_double(report.max_column_sum_error) << ")\n";
  log << "  interior (|2m| <= " << report.interior_halfwidth_doubled
      << "): " << (report.interior_ok ? "clean" : "VIOLATIONS") << "\n";
  for (const auto &violation : report.interior_violations) log << "    violation: " << violation << "\n";
  log << "  boundary warnings: " << report.boundary_warnings.size() << "\n";
  for (const auto &warning : report.boundary_warnings) log << "    warning: " << warning << "\n";
  log << "  max asymmetry |D(a,b)-D(b,a)|: " << format_double(report.max_asymmetry) << "\n";
  return report.pass() ? 0 : 1;
}

/// `break-even`: largest ensemble whose noise beats the thermal signal.
inline int cmd_break_even(double nutation_angle, double polarization, const CommandOptions &options) {
  auto result = break_even_spin_count(nutation_angle, polarization);
  if (result.unbounded) {
    *options.log << "break-even: unbounded (zero polarization)\n";
  } else {
    *options.log << "break-even: bound = " << format_double(result.bound)
                 << ", max spins = " << result.max_spins << "\n";
  }
  return 0;
}

}  // namespace spinchain

#endif
