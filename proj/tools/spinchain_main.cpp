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

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spinchain/commands.hpp"
#include "spinchain/runfile.hpp"
#include "spinchain/version.hpp"

namespace {

std::vector<int> parse_lags(const std::string &text) {
  std::vector<int> lags;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    lags.push_back(std::stoi(item));
  }
  if (lags.empty()) throw CLI::ValidationError("--lags", "expected a comma-separated list like 1,2,4,8");
  return lags;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"spinchain: exact and Monte Carlo simulation of repeated collective "
               "spin readouts interleaved with relaxation channels"};
  app.set_version_flag("--version", spinchain::kEngineVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string lags_text = "1,2,4,8";
  bool lags_given = false;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int postselect = 0;
  bool postselect_given = false;
  int threads = 1;
  double tolerance = 1e-9;
  bool corrupt_kernel = false;
  double beta_angle = 0.0;
  double epsilon = 0.0;

  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--config", config_path, "run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override the config seed")->each([&](const std::string &) {
      seed_given = true;
    });
    cmd->add_option("--out", out_dir, "override the config output directory");
    cmd->add_option("--threads", threads, "worker threads for trajectory sampling")
        ->check(CLI::Range(1, 256));
  };

  auto *sample = app.add_subcommand("sample", "sample trajectories and empirical histograms");
  add_common(sample);
  sample->add_option("--postselect-m1", postselect, "force the first outcome (doubled units)")
      ->each([&](const std::string &) { postselect_given = true; });

  auto *exact = app.add_subcommand("exact", "exact distribution, joints, and covariance table");
  add_common(exact);
  exact->add_option("--lags", lags_text, "comma-separated lags (default 1,2,4,8)")
      ->each([&](const std::string &) { lags_given = true; });

  auto *covariance = app.add_subcommand("covariance", "covariance table only");
  add_common(covariance);
  covariance->add_option("--lags", lags_text, "comma-separated lags (default 1,2,4,8)")
      ->each([&](const std::string &) { lags_given = true; });

  auto *oracle = app.add_subcommand("oracle-check", "dense-engine equivalence check (n <= 8)");
  add_common(oracle);
  oracle->add_option("--tolerance", tolerance, "max allowed total-variation distance");
  oracle->add_flag("--corrupt-kernel", corrupt_kernel, "negative-control hook: bias one kernel column")
      ->group("");  // hidden

  auto *validate = app.add_subcommand("validate-kernel", "check the readout kernel constraints");
  add_common(validate);

  auto *break_even = app.add_subcommand("break-even", "largest ensemble where noise beats polarization");
  break_even->add_option("--beta-angle", beta_angle, "nutation angle in radians, (0, pi/2]")->required();
  break_even->add_option("--epsilon", epsilon, "thermal polarization in [0, 1)")->required();

  CLI11_PARSE(app, argc, argv);

  spinchain::CommandOptions options;
  if (seed_given) options.seed_override = seed;
  if (postselect_given) options.postselect_m1 = postselect;
  if (!out_dir.empty()) options.out_override = out_dir;
  options.threads = threads;
  options.tolerance = tolerance;
  options.corrupt_kernel = corrupt_kernel;

  try {
    if (break_even->parsed()) return spinchain::cmd_break_even(beta_angle, epsilon, options);

    spinchain::RunFile run = spinchain::parse_run_file(config_path);
    if (sample->parsed()) return spinchain::cmd_sample(run, options);
    if (exact->parsed() || covariance->parsed()) {
      options.lags = parse_lags(lags_text);
      options.lags_explicit = lags_given;
      return exact->parsed() ? spinchain::cmd_exact(run, options) : spinchain::cmd_covariance(run, options);
    }
    if (oracle->parsed()) return spinchain::cmd_oracle_check(run, options);
    if (validate->parsed()) return spinchain::cmd_validate_kernel(run, options);
  } catch (const spinchain::RunFileError &e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
