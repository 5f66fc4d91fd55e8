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

#ifndef SPINCHAIN_MEASUREMENT_HPP
#define SPINCHAIN_MEASUREMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "spinchain/matrix.hpp"
#include "spinchain/sector.hpp"

namespace spinchain {

/// Outcome model of one collective magnetization readout.
///
/// outcome_given_sector(m, l) is the probability of *recording* outcome m
/// when the ensemble sits in sector l. width == 0 is the projective limit
/// (the matrix is the identity); width == infinity is the uninformative
/// limit (every column uniform). Columns are normalized over the truncated
/// outcome range by explicit summation, so each column is a distribution
/// even at the boundary sectors.
struct MeasurementKernel {
  int ensemble_size = 0;
  double width = 0.0;
  Matrix outcome_given_sector;     // (N+1) x (N+1), column-stochastic
  std::vector<double> normalizers; // per-column normalization constants

  bool projective() const { return width == 0.0; }
};

inline MeasurementKernel gaussian_kernel(int n, double width) {
  check_ensemble_size(n);
  if (!(width >= 0.0)) throw std::domain_error("gaussian_kernel: width must be >= 0");
  const std::size_t dim = static_cast<std::size_t>(sector_count(n));
  MeasurementKernel kernel;
  kernel.ensemble_size = n;
  kernel.width = width;
  kernel.outcome_given_sector = Matrix(dim, dim);
  kernel.normalizers.assign(dim, 1.0);
  if (width == 0.0) {
    for (std::size_t i = 0; i < dim; ++i) kernel.outcome_given_sector(i, i) = 1.0;
    return kernel;
  }
  // Outcome and sector lattices coincide, so m - l is the index difference.
  // The infinite-width sentinel needs no special casing: the exponent is -0.
  const long double two_w2 = 2.0L * static_cast<long double>(width) * static_cast<long double>(width);
  std::vector<long double> column(dim);
  for (std::size_t l = 0; l < dim; ++l) {
    long double sum = 0.0L;
    for (std::size_t m = 0; m < dim; ++m) {
      long double diff = static_cast<long double>(m) - static_cast<long double>(l);
      column[m] = std::exp(-(diff * diff) / two_w2);
      sum += column[m];
    }
    kernel.normalizers[l] = static_cast<double>(1.0L / sum);
    for (std::size_t m = 0; m < dim; ++m) {
      kernel.outcome_given_sector(m, l) = static_cast<double>(column[m] / sum);
    }
  }
  return kernel;
}

struct KernelValidationReport {
  // Column-stochasticity. Failure means the kernel is not a measurement at
  // all, so this is the only hard failure.
  bool columns_stochastic = true;
  double max_column_sum_error = 0.0;
  // Row mode location / unimodality, checked away from the truncation
  // boundary. The same checks outside that region are downgraded to
  // warnings: truncated normalizers legitimately distort the boundary rows.
  bool interior_ok = true;
  int interior_halfwidth_doubled = 0;  // |d| <= this is "interior"
  std::vector<std::string> interior_violations;
  std::vector<std::string> boundary_warnings;
  double max_asymmetry = 0.0;  // max |D(a,b) - D(b,a)|; informational only

  bool pass() const { return columns_stochastic && interior_ok; }
};

inline KernelValidationReport validate_kernel(const MeasurementKernel &kernel) {
  const int n = kernel.ensemble_size;
  const std::size_t dim = static_cast<std::size_t>(sector_count(n));
  const Matrix &d = kernel.outcome_given_sector;
  KernelValidationReport report;

  for (std::size_t l = 0; l < dim; ++l) {
    long double sum = 0.0L;
    for (std::size_t m = 0; m < dim; ++m) {
      if (!(d(m, l) >= 0.0)) {
        report.columns_stochastic = false;
        report.interior_violations.push_back("negative entry at outcome " +
                                             std::to_string(doubled_from_index(n, static_cast<int>(m))));
      }
      sum += d(m, l);
    }
    double err = std::abs(static_cast<double>(sum) - 1.0);
    report.max_column_sum_error = std::max(report.max_column_sum_error, err);
    if (err > 1e-12) report.columns_stochastic = false;
  }

  // Interior region: |m| <= N/2 - ceil(4w), in doubled units.
  int margin_doubled;
  if (!std::isfinite(kernel.width)) {
    margin_doubled = -1;  // empty interior; the uniform kernel has no mode
  } else {
    margin_doubled = n - 2 * static_cast<int>(std::ceil(4.0 * kernel.width));
  }
  report.interior_halfwidth_doubled = margin_doubled;
  auto interior = [&](std::size_t idx) {
    return std::abs(doubled_from_index(n, static_cast<int>(idx))) <= margin_doubled;
  };

  const double tie = 1e-12;
  auto higher = [&](double lhs, double rhs) { return lhs > rhs * (1.0 + tie) + tie; };
  // Row-wise mode/unimodality, scanned over a given sector range.
  auto row_trouble = [&](std::size_t m, std::size_t lo, std::size_t hi) -> std::string {
    std::size_t argmax = lo;
    for (std::size_t l = lo; l <= hi; ++l) {
      if (d(m, l) > d(m, argmax)) argmax = l;
    }
    if (higher(d(m, argmax), d(m, m))) {
      return "row mode at sector " + std::to_string(doubled_from_index(n, static_cast<int>(argmax)));
    }
    for (std::size_t l = std::max(m, lo); l < hi; ++l) {
      if (higher(d(m, l + 1), d(m, l))) return "row not unimodal";
    }
    for (std::size_t l = std::min(m, hi); l > lo; --l) {
      if (higher(d(m, l - 1), d(m, l))) return "row not unimodal";
    }
    return {};
  };

  std::size_t interior_lo = dim, interior_hi = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (interior(i)) {
      interior_lo = std::min(interior_lo, i);
      interior_hi = std::max(interior_hi, i);
    }
  }
  const bool has_interior = interior_lo <= interior_hi;

  for (std::size_t m = 0; m < dim; ++m) {
    std::string label = "outcome " + std::to_string(doubled_from_index(n, static_cast<int>(m)));
    if (has_interior && interior(m)) {
      std::string what = row_trouble(m, interior_lo, interior_hi);
      if (!what.empty()) {
        report.interior_ok = false;
        report.interior_violations.push_back(label + ": " + what);
        continue;
      }
    }
    std::string what = row_trouble(m, 0, dim - 1);
    if (!what.empty()) report.boundary_warnings.push_back(label + ": " + what);
  }

  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a + 1; b < dim; ++b) {
      report.max_asymmetry = std::max(report.max_asymmetry, std::abs(d(a, b) - d(b, a)));
    }
  }
  return report;
}

/// Predictive outcome distribution: P(m) = sum_l D(m, l) q(l).
inline SectorDistribution outcome_distribution(const MeasurementKernel &kernel,
                                               const SectorDistribution &q) {
  if (kernel.ensemble_size != q.ensemble_size) {
    throw std::invalid_argument("outcome_distribution: dimension mismatch");
  }
  std::vector<double> p = apply_matrix(kernel.outcome_given_sector, q.probs);
  double total = distribution_sum(p);
  for (double &v : p) v /= total;
  return {q.ensemble_size, std::move(p)};
}

/// Bayesian update on a recorded outcome: q'(l) = D(m, l) q(l) / P(m).
/// In the projective limit this collapses to the delta distribution at m.
/// Conditioning on an outcome of zero probability is reported as an error;
/// it means the caller's kernel, state, and outcome are inconsistent.
inline SectorDistribution posterior_update(const MeasurementKernel &kernel,
                                           const SectorDistribution &q, int m_doubled) {
  if (kernel.ensemble_size != q.ensemble_size) {
    throw std::invalid_argument("posterior_update: dimension mismatch");
  }
  const int n = q.ensemble_size;
  const std::size_t row = static_cast<std::size_t>(index_from_doubled(n, m_doubled));
  const Matrix &d = kernel.outcome_given_sector;
  std::vector<double> weighted(q.probs.size());
  long double mass = 0.0L;
  for (std::size_t l = 0; l < q.probs.size(); ++l) {
    weighted[l] = d(row, l) * q.probs[l];
    mass += weighted[l];
  }
  if (!(mass > 0.0L)) {
    throw std::domain_error("posterior_update: conditioning on impossible outcome " +
                            std::to_string(m_doubled));
  }
  for (double &v : weighted) v = static_cast<double>(v / mass);
  return {n, std::move(weighted)};
}

struct MeasurementRecord {
  int step = 0;             // 1-based position in the chain
  int outcome_doubled = 0;  // recorded magnetization, doubled units
  double probability = 0.0; // predictive probability of that outcome
};

}  // namespace spinchain

#endif
