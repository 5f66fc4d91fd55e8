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

#ifndef SPINCHAIN_CHANNELS_HPP
#define SPINCHAIN_CHANNELS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spinchain/matrix.hpp"
#include "spinchain/sector.hpp"

namespace spinchain {

enum class ChannelKind {
  CollectiveDepolarizing,  // rho -> (1-lambda) rho + lambda * fully mixed
  EpsilonPolarizing,       // rho -> (1-lambda) rho + lambda * reference state
  ProductFlips,            // independent per-spin flips: alpha up->down, beta down->up
  ProductFromRotation,     // per-spin depolarize(lambda) then x-rotation(theta)
};

struct ChannelSpec {
  ChannelKind kind = ChannelKind::CollectiveDepolarizing;
  double lambda = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<SectorDistribution> reference;

  static ChannelSpec collective_depolarizing(double lambda) {
    ChannelSpec s;
    s.kind = ChannelKind::CollectiveDepolarizing;
    s.lambda = lambda;
    return s;
  }
  static ChannelSpec epsilon_polarizing(double lambda, SectorDistribution reference) {
    ChannelSpec s;
    s.kind = ChannelKind::EpsilonPolarizing;
    s.lambda = lambda;
    s.reference = std::move(reference);
    return s;
  }
  static ChannelSpec product_flips(double alpha, double beta) {
    ChannelSpec s;
    s.kind = ChannelKind::ProductFlips;
    s.alpha = alpha;
    s.beta = beta;
    return s;
  }
  static ChannelSpec product_from_rotation(double lambda, double theta) {
    ChannelSpec s;
    s.kind = ChannelKind::ProductFromRotation;
    s.lambda = lambda;
    s.theta = theta;
    return s;
  }
};

/// Mixing weight accumulated over one evolution interval: 1 - exp(-dt/T).
inline double lambda_from_interval(double dt, double relaxation_time) {
  if (!(dt >= 0.0)) throw std::domain_error("interval must be >= 0");
  if (!(relaxation_time > 0.0)) throw std::domain_error("relaxation time must be > 0");
  return -std::expm1(-dt / relaxation_time);
}

/// Per-spin flip probability of depolarize(lambda) followed by an x-rotation
/// with flip amplitude sin(theta): both directions flip with
/// (1-lambda) sin^2(theta) + lambda/2.
inline double rotation_depolarizing_flip_probability(double lambda, double theta) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::domain_error("lambda must be in [0, 1]");
  double s = std::sin(theta);
  return (1.0 - lambda) * s * s + 0.5 * lambda;
}

/// Sector-to-sector action of one evolution interval.
/// next_given_current(m', m) = P(sector m' | uniform sector-m state before).
struct TransitionKernel {
  int ensemble_size = 0;
  Matrix next_given_current;
};

namespace detail {

inline void check_probability(double p, const char *name) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error(std::string(name) + " must be in [0, 1]");
}

}  // namespace detail

/// Kernel of N independent identical spin flips. Column m1 is the discrete
/// convolution of Bin(#up, k, alpha) down-flips against Bin(#down, l, beta)
/// up-flips; every outcome lands inside [0, N], so columns are complete and
/// are renormalized only to pin rounding.
inline TransitionKernel product_transition_kernel(int n, double alpha, double beta) {
  check_ensemble_size(n);
  detail::check_probability(alpha, "alpha");
  detail::check_probability(beta, "beta");
  const int dim = sector_count(n);
  TransitionKernel kernel;
  kernel.ensemble_size = n;
  kernel.next_given_current = Matrix(static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));

  auto table = detail::shared_log_factorials(static_cast<std::size_t>(n));
  auto log_pmf_row = [&](int count, double p) {
    std::vector<long double> row(static_cast<std::size_t>(count) + 1);
    for (int k = 0; k <= count; ++k) {
      if (p == 0.0) {
        row[k] = k == 0 ? 0.0L : -std::numeric_limits<long double>::infinity();
      } else if (p == 1.0) {
        row[k] = k == count ? 0.0L : -std::numeric_limits<long double>::infinity();
      } else {
        row[k] = table->log_choose(static_cast<std::size_t>(count), static_cast<std::size_t>(k)) +
                 static_cast<long double>(k) * std::log(static_cast<long double>(p)) +
                 static_cast<long double>(count - k) * std::log1p(static_cast<long double>(-p));
      }
    }
    return row;
  };

  std::vector<long double> column(static_cast<std::size_t>(dim));
  for (int up = 0; up <= n; ++up) {
    const int down = n - up;
    auto log_down_flips = log_pmf_row(up, alpha);
    auto log_up_flips = log_pmf_row(down, beta);
    std::fill(column.begin(), column.end(), 0.0L);
    for (int k = 0; k <= up; ++k) {
      if (log_down_flips[k] == -std::numeric_limits<long double>::infinity()) continue;
      for (int l = 0; l <= down; ++l) {
        if (log_up_flips[l] == -std::numeric_limits<long double>::infinity()) continue;
        column[static_cast<std::size_t>(up - k + l)] += std::exp(log_down_flips[k] + log_up_flips[l]);
      }
    }
    long double sum = 0.0L;
    for (long double v : column) sum += v;
    for (int i = 0; i < dim; ++i) {
      kernel.next_given_current(static_cast<std::size_t>(i), static_cast<std::size_t>(up)) =
          static_cast<double>(column[static_cast<std::size_t>(i)] / sum);
    }
  }
  return kernel;
}

/// Conditional mean/stddev of the magnetization one product-flip interval
/// after a definite sector m1 (spin units).
///
/// Derived directly from the flip counts: with u = N/2 + m1 spins up,
/// m2 = m1 - k + l for k ~ Bin(u, alpha), l ~ Bin(N - u, beta). Note both
/// the sign of the drift term, +(N/2)(beta - alpha), and the variance are
/// fixed by this kernel (and by the dense oracle); see the tests pinning
/// them against brute force.
inline Moments conditional_moments(int n, double alpha, double beta, double m1) {
  check_ensemble_size(n);
  detail::check_probability(alpha, "alpha");
  detail::check_probability(beta, "beta");
  const double half_n = 0.5 * n;
  double mean = m1 * (1.0 - (alpha + beta)) + half_n * (beta - alpha);
  double va = alpha * (1.0 - alpha);
  double vb = beta * (1.0 - beta);
  double variance = half_n * (va + vb) + m1 * (va - vb);
  if (variance < 0.0) variance = 0.0;
  return {mean, std::sqrt(variance)};
}

/// Kernel of a mixing channel: keep the sector with weight (1-lambda),
/// resample it from `reference` with weight lambda. The collective
/// depolarizing map is the special case reference = mixed binomial.
inline TransitionKernel mixing_kernel(int n, double lambda, const SectorDistribution &reference) {
  check_ensemble_size(n);
  detail::check_probability(lambda, "lambda");
  if (reference.ensemble_size != n) throw std::invalid_argument("mixing_kernel: dimension mismatch");
  const std::size_t dim = static_cast<std::size_t>(sector_count(n));
  TransitionKernel kernel;
  kernel.ensemble_size = n;
  kernel.next_given_current = Matrix(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    for (std::size_t row = 0; row < dim; ++row) {
      double v = lambda * reference.probs[row];
      if (row == col) v += 1.0 - lambda;
      kernel.next_given_current(row, col) = v;
    }
  }
  return kernel;
}

inline TransitionKernel make_transition_kernel(int n, const ChannelSpec &spec) {
  switch (spec.kind) {
    case ChannelKind::CollectiveDepolarizing:
      return mixing_kernel(n, spec.lambda, mixed_sector_distribution(n));
    case ChannelKind::EpsilonPolarizing:
      if (!spec.reference) throw std::invalid_argument("epsilon-polarizing channel needs a reference distribution");
      return mixing_kernel(n, spec.lambda, *spec.reference);
    case ChannelKind::ProductFlips:
      return product_transition_kernel(n, spec.alpha, spec.beta);
    case ChannelKind::ProductFromRotation: {
      double flip = rotation_depolarizing_flip_probability(spec.lambda, spec.theta);
      return product_transition_kernel(n, flip, flip);
    }
  }
  throw std::logic_error("unreachable channel kind");
}

inline SectorDistribution apply_channel(const TransitionKernel &kernel, const SectorDistribution &q) {
  if (kernel.ensemble_size != q.ensemble_size) {
    throw std::invalid_argument("apply_channel: dimension mismatch");
  }
  std::vector<double> next = apply_matrix(kernel.next_given_current, q.probs);
  double total = distribution_sum(next);
  for (double &v : next) v /= total;
  return {q.ensemble_size, std::move(next)};
}

}  // namespace spinchain

#endif
