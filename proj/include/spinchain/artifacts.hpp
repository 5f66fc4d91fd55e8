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

#ifndef SPINCHAIN_ARTIFACTS_HPP
#define SPINCHAIN_ARTIFACTS_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spinchain/chain.hpp"
#include "spinchain/sector.hpp"

namespace spinchain {

// CSV emitters. Keys are doubled-magnetization integers (lossless joins for
// odd ensembles); floats are printed with %.17g so files round-trip
// bit-exactly and rerunning a seeded config reproduces them byte for byte.

inline std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

inline std::ofstream open_artifact(const std::filesystem::path &path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary: no platform newline surprises
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

/// Guard used before any distribution leaves the process.
inline void verify_unit_mass(const std::vector<double> &probs, const std::string &what) {
  double total = distribution_sum(probs);
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::logic_error(what + ": refusing to write distribution with mass " + format_double(total));
  }
}

inline void write_trajectories_csv(const std::filesystem::path &path,
                                   const std::vector<Trajectory> &trajectories) {
  auto out = open_artifact(path);
  out << "trajectory_id,step,m_doubled\n";
  for (std::size_t id = 0; id < trajectories.size(); ++id) {
    for (const auto &record : trajectories[id].records) {
      out << id << ',' << record.step << ',' << record.outcome_doubled << '\n';
    }
  }
}

inline void write_distribution_csv(const std::filesystem::path &path, const SectorDistribution &dist,
                                   const std::string &what = "distribution") {
  verify_unit_mass(dist.probs, what);
  auto out = open_artifact(path);
  out << "m_doubled,probability\n";
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    out << doubled_from_index(dist.ensemble_size, static_cast<int>(i)) << ','
        << format_double(dist.probs[i]) << '\n';
  }
}

inline void write_joint_csv(const std::filesystem::path &path, const JointDistribution &joint) {
  long double total = 0.0L;
  for (double v : joint.probs.data) total += v;
  if (std::abs(static_cast<double>(total) - 1.0) > 1e-9) {
    throw std::logic_error("joint distribution mass " + format_double(static_cast<double>(total)));
  }
  auto out = open_artifact(path);
  out << "m_i_doubled,m_j_doubled,probability\n";
  for (std::size_t a = 0; a < joint.probs.rows; ++a) {
    for (std::size_t b = 0; b < joint.probs.cols; ++b) {
      out << doubled_from_index(joint.ensemble_size, static_cast<int>(a)) << ','
          << doubled_from_index(joint.ensemble_size, static_cast<int>(b)) << ','
          << format_double(joint.probs(a, b)) << '\n';
    }
  }
}

struct CovarianceRow {
  int lag = 0;
  double r_exact = 0.0;
  double r_closed_form = 0.0;  // NaN when no closed form applies
  double r_empirical = 0.0;    // NaN when no trajectories were sampled
  double std_error = 0.0;
};

inline void write_covariance_csv(const std::filesystem::path &path,
                                 const std::vector<CovarianceRow> &rows) {
  auto out = open_artifact(path);
  out << "lag,r_exact,r_closed_form,r_empirical,stderr\n";
  for (const auto &row : rows) {
    out << row.lag << ',' << format_double(row.r_exact) << ',' << format_double(row.r_closed_form)
        << ',' << format_double(row.r_empirical) << ',' << format_double(row.std_error) << '\n';
  }
}

/// Histogram of recorded outcomes at one step, normalized to a distribution.
inline SectorDistribution step_histogram(const std::vector<Trajectory> &trajectories, int n, int step) {
  std::vector<double> counts(static_cast<std::size_t>(sector_count(n)), 0.0);
  double total = 0.0;
  for (const auto &t : trajectories) {
    counts[static_cast<std::size_t>(index_from_doubled(n, t.outcome_doubled(step)))] += 1.0;
    total += 1.0;
  }
  if (total == 0.0) throw std::domain_error("step_histogram: no trajectories");
  for (double &c : counts) c /= total;
  return {n, std::move(counts)};
}

}  // namespace spinchain

#endif
