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

#ifndef SPINCHAIN_CHAIN_HPP
#define SPINCHAIN_CHAIN_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "spinchain/channels.hpp"
#include "spinchain/matrix.hpp"
#include "spinchain/measurement.hpp"
#include "spinchain/rng.hpp"
#include "spinchain/sector.hpp"

namespace spinchain {

// The repeated measure-then-evolve cycle. One chain step is: predictive
// outcome distribution, record an outcome, Bayesian posterior, channel.
// Because the readout kernel is column-stochastic, a measurement whose
// outcome is ignored leaves the sector distribution unchanged, so exact
// marginals and two-time joints never need a sum over intermediate
// outcomes: the sector distribution itself is the Markov state.

enum class InitialStateKind { Mixed, Product, Sector };

struct InitialStateSpec {
  InitialStateKind kind = InitialStateKind::Mixed;
  double up_probability = 0.5;             // Product
  std::complex<double> coherence{0.0, 0.0};  // recorded; z-readout statistics never see it
  std::optional<SectorDistribution> sector_probs;  // Sector

  static InitialStateSpec mixed() { return {}; }
  static InitialStateSpec product(double up_probability, std::complex<double> coherence = {}) {
    InitialStateSpec s;
    s.kind = InitialStateKind::Product;
    s.up_probability = up_probability;
    s.coherence = coherence;
    return s;
  }
  static InitialStateSpec sector(SectorDistribution q0) {
    InitialStateSpec s;
    s.kind = InitialStateKind::Sector;
    s.sector_probs = std::move(q0);
    return s;
  }
};

struct RunConfig {
  int ensemble_size = 0;
  double kernel_width = 0.0;  // 0 = projective readout
  ChannelSpec channel;
  InitialStateSpec initial;
  int steps = 1;
  int trajectories = 0;
  std::uint64_t seed = 0;
};

inline SectorDistribution initial_sector_distribution(int n, const InitialStateSpec &spec) {
  switch (spec.kind) {
    case InitialStateKind::Mixed:
      return mixed_sector_distribution(n);
    case InitialStateKind::Product:
      return binomial_sector_distribution(n, spec.up_probability);
    case InitialStateKind::Sector: {
      if (!spec.sector_probs) throw std::invalid_argument("sector initial state needs a distribution");
      if (spec.sector_probs->ensemble_size != n) {
        throw std::invalid_argument("initial sector distribution has wrong ensemble size");
      }
      return make_sector_distribution(n, spec.sector_probs->probs);
    }
  }
  throw std::logic_error("unreachable initial state kind");
}

/// Kernels assembled once per configuration; everything here is immutable
/// and shared read-only across sampling threads.
struct ChainContext {
  RunConfig config;
  MeasurementKernel kernel;
  TransitionKernel transition;
  SectorDistribution initial;
};

inline ChainContext make_context(RunConfig config) {
  if (config.steps < 1) throw std::domain_error("steps must be >= 1");
  ChainContext ctx{std::move(config), {}, {}, {}};
  ctx.kernel = gaussian_kernel(ctx.config.ensemble_size, ctx.config.kernel_width);
  ctx.transition = make_transition_kernel(ctx.config.ensemble_size, ctx.config.channel);
  ctx.initial = initial_sector_distribution(ctx.config.ensemble_size, ctx.config.initial);
  return ctx;
}

struct Trajectory {
  std::uint64_t stream_id = 0;
  std::vector<MeasurementRecord> records;  // one per step, in order

  int outcome_doubled(int step) const { return records[static_cast<std::size_t>(step - 1)].outcome_doubled; }
  int length() const { return static_cast<int>(records.size()); }
};

/// Samples one trajectory. Deterministic given (config.seed, index);
/// `forced_first_outcome` post-selects the first record instead of drawing
/// it (doubled units).
inline Trajectory run_trajectory(const ChainContext &ctx, std::uint64_t index,
                                 std::optional<int> forced_first_outcome = std::nullopt) {
  const int n = ctx.config.ensemble_size;
  TrajectoryStream stream(ctx.config.seed, index);
  Trajectory out;
  out.stream_id = stream.id();
  out.records.reserve(static_cast<std::size_t>(ctx.config.steps));
  SectorDistribution q = ctx.initial;
  for (int step = 1; step <= ctx.config.steps; ++step) {
    SectorDistribution predictive = outcome_distribution(ctx.kernel, q);
    int outcome_d;
    if (step == 1 && forced_first_outcome) {
      outcome_d = *forced_first_outcome;
      if (predictive.at_doubled(outcome_d) <= 0.0) {
        throw std::domain_error("post-selected first outcome has zero probability");
      }
    } else {
      std::size_t idx = sample_index(predictive.probs, stream.next_unit());
      outcome_d = doubled_from_index(n, static_cast<int>(idx));
    }
    out.records.push_back({step, outcome_d, predictive.at_doubled(outcome_d)});
    q = posterior_update(ctx.kernel, q, outcome_d);
    if (step < ctx.config.steps) q = apply_channel(ctx.transition, q);
  }
  return out;
}

/// Samples `count` trajectories, optionally across threads. Each trajectory
/// has its own counter-derived stream, so the result is identical for every
/// thread count.
inline std::vector<Trajectory> run_trajectories(const ChainContext &ctx, int count, int threads = 1,
                                                std::optional<int> forced_first_outcome = std::nullopt) {
  if (count < 0) throw std::domain_error("trajectory count must be >= 0");
  std::vector<Trajectory> out(static_cast<std::size_t>(count));
  if (count == 0) return out;
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) {
      out[static_cast<std::size_t>(i)] = run_trajectory(ctx, static_cast<std::uint64_t>(i), forced_first_outcome);
    }
    return out;
  }
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) {
        out[static_cast<std::size_t>(i)] = run_trajectory(ctx, static_cast<std::uint64_t>(i), forced_first_outcome);
      }
    });
  }
  for (auto &w : workers) w.join();
  return out;
}

/// Probability that two records `lag` steps apart have decorrelated through
/// the mixing channel: 1 - (1-lambda)^lag. Equals the recursion
/// eta_k = lambda + (1-lambda) eta_{k-1}, eta_0 = 0.
inline double independence_probability(double lambda, int lag) {
  detail::check_probability(lambda, "lambda");
  if (lag < 0) throw std::domain_error("lag must be >= 0");
  if (lag == 0) return 0.0;
  return -std::expm1(static_cast<double>(lag) * std::log1p(-lambda));
}

namespace detail {

inline std::vector<long double> to_extended(const std::vector<double> &v) {
  return std::vector<long double>(v.begin(), v.end());
}

inline void apply_matrix_extended(const Matrix &a, const std::vector<long double> &x,
                                  std::vector<long double> &y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    long double acc = 0.0L;
    const double *row = a.data.data() + r * a.cols;
    for (std::size_t c = 0; c < a.cols; ++c) acc += static_cast<long double>(row[c]) * x[c];
    y[r] = acc;
  }
}

}  // namespace detail

/// Exact single-time outcome distribution at a given step (1-based).
inline SectorDistribution predictive_distribution(const ChainContext &ctx, int step) {
  if (step < 1) throw std::out_of_range("step must be >= 1");
  const std::size_t dim = ctx.initial.probs.size();
  std::vector<long double> q = detail::to_extended(ctx.initial.probs);
  std::vector<long double> scratch(dim);
  for (int s = 1; s < step; ++s) {
    detail::apply_matrix_extended(ctx.transition.next_given_current, q, scratch);
    q.swap(scratch);
  }
  detail::apply_matrix_extended(ctx.kernel.outcome_given_sector, q, scratch);
  long double total = 0.0L;
  for (long double v : scratch) total += v;
  std::vector<double> probs(dim);
  for (std::size_t i = 0; i < dim; ++i) probs[i] = static_cast<double>(scratch[i] / total);
  return {ctx.config.ensemble_size, std::move(probs)};
}

/// Two-time joint outcome distribution.
/// probs(a, b) = P(outcome at later step = sector a, outcome at earlier = b).
struct JointDistribution {
  int ensemble_size = 0;
  int lag = 0;
  Matrix probs;

  /// Marginal of the later (first-index) outcome.
  SectorDistribution later_marginal() const {
    std::vector<double> m(probs.rows, 0.0);
    for (std::size_t a = 0; a < probs.rows; ++a) {
      long double acc = 0.0L;
      for (std::size_t b = 0; b < probs.cols; ++b) acc += probs(a, b);
      m[a] = static_cast<double>(acc);
    }
    return {ensemble_size, std::move(m)};
  }
  SectorDistribution earlier_marginal() const {
    std::vector<double> m(probs.cols, 0.0);
    for (std::size_t b = 0; b < probs.cols; ++b) {
      long double acc = 0.0L;
      for (std::size_t a = 0; a < probs.rows; ++a) acc += probs(a, b);
      m[b] = static_cast<double>(acc);
    }
    return {ensemble_size, std::move(m)};
  }
};

/// Exact joint distribution of the outcomes at two steps, later > earlier.
/// Forward-propagates to the earlier step, conditions on each outcome
/// there, pushes the posterior through `lag` channel intervals (ignored
/// intermediate measurements drop out exactly), and reads the later
/// predictive. All accumulation in extended precision.
inline JointDistribution exact_joint_distribution(const ChainContext &ctx, int later_step,
                                                  int earlier_step) {
  if (earlier_step < 1 || later_step <= earlier_step) {
    throw std::out_of_range("need later_step > earlier_step >= 1");
  }
  if (later_step > ctx.config.steps || earlier_step > ctx.config.steps) {
    throw std::out_of_range("step beyond configured chain length");
  }
  const std::size_t dim = ctx.initial.probs.size();
  const Matrix &d = ctx.kernel.outcome_given_sector;
  const Matrix &t = ctx.transition.next_given_current;
  const int lag = later_step - earlier_step;

  std::vector<long double> q = detail::to_extended(ctx.initial.probs);
  std::vector<long double> scratch(dim);
  for (int s = 1; s < earlier_step; ++s) {
    detail::apply_matrix_extended(t, q, scratch);
    q.swap(scratch);
  }

  JointDistribution joint;
  joint.ensemble_size = ctx.config.ensemble_size;
  joint.lag = lag;
  joint.probs = Matrix(dim, dim);

  std::vector<long double> posterior(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    long double pb = 0.0L;
    for (std::size_t l = 0; l < dim; ++l) pb += static_cast<long double>(d(b, l)) * q[l];
    if (pb <= 0.0L) continue;  // impossible earlier outcome: joint row stays zero
    for (std::size_t l = 0; l < dim; ++l) {
      posterior[l] = static_cast<long double>(d(b, l)) * q[l] / pb;
    }
    for (int s = 0; s < lag; ++s) {
      detail::apply_matrix_extended(t, posterior, scratch);
      posterior.swap(scratch);
    }
    for (std::size_t a = 0; a < dim; ++a) {
      long double pa = 0.0L;
      for (std::size_t l = 0; l < dim; ++l) pa += static_cast<long double>(d(a, l)) * posterior[l];
      joint.probs(a, b) = static_cast<double>(pb * pa);
    }
  }
  return joint;
}

/// Covariance of the two magnetization readouts described by a joint
/// distribution (spin units).
inline double covariance(const JointDistribution &joint) {
  const int n = joint.ensemble_size;
  const std::size_t dim = joint.probs.rows;
  long double mean_a = 0.0L, mean_b = 0.0L, cross = 0.0L;
  for (std::size_t a = 0; a < dim; ++a) {
    const long double ma = magnetization_from_index(n, static_cast<int>(a));
    for (std::size_t b = 0; b < dim; ++b) {
      const long double mb = magnetization_from_index(n, static_cast<int>(b));
      const long double p = joint.probs(a, b);
      mean_a += ma * p;
      mean_b += mb * p;
      cross += ma * mb * p;
    }
  }
  return static_cast<double>(cross - mean_a * mean_b);
}

/// Pearson correlation of the two readouts of a joint distribution.
inline double correlation(const JointDistribution &joint) {
  const int n = joint.ensemble_size;
  const std::size_t dim = joint.probs.rows;
  long double ea = 0.0L, eb = 0.0L, eaa = 0.0L, ebb = 0.0L, eab = 0.0L;
  for (std::size_t a = 0; a < dim; ++a) {
    const long double ma = magnetization_from_index(n, static_cast<int>(a));
    for (std::size_t b = 0; b < dim; ++b) {
      const long double mb = magnetization_from_index(n, static_cast<int>(b));
      const long double p = joint.probs(a, b);
      ea += ma * p;
      eb += mb * p;
      eaa += ma * ma * p;
      ebb += mb * mb * p;
      eab += ma * mb * p;
    }
  }
  long double va = eaa - ea * ea, vb = ebb - eb * eb;
  if (!(va > 0.0L) || !(vb > 0.0L)) throw std::domain_error("correlation: degenerate marginal");
  return static_cast<double>((eab - ea * eb) / std::sqrt(va * vb));
}

/// Closed-form lag covariance of the mixing-channel chain:
/// N/4 (1-lambda)^k + (eta_k - 1) E1^2, with E1 the first-readout mean.
/// Exact for a projective readout of the mixed state; for the Gaussian
/// readout the difference is boundary truncation of the kernel.
inline double mixing_covariance_closed_form(int n, double lambda, int lag, double first_mean) {
  check_ensemble_size(n);
  if (lag < 1) throw std::domain_error("closed-form covariance is a lag >= 1 quantity");
  double keep = std::pow(1.0 - lambda, lag);
  return 0.25 * n * keep + (independence_probability(lambda, lag) - 1.0) * first_mean * first_mean;
}

struct CovarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

namespace detail {

struct PairStats {
  long double n = 0.0L, sx = 0.0L, sy = 0.0L, sxx = 0.0L, syy = 0.0L, sxy = 0.0L;

  void add(long double x, long double y) {
    n += 1.0L;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  void accumulate(const PairStats &o) {
    n += o.n;
    sx += o.sx;
    sy += o.sy;
    sxx += o.sxx;
    syy += o.syy;
    sxy += o.sxy;
  }
  void subtract(const PairStats &o) {
    n -= o.n;
    sx -= o.sx;
    sy -= o.sy;
    sxx -= o.sxx;
    syy -= o.syy;
    sxy -= o.sxy;
  }
  long double covariance() const { return (sxy - sx * sy / n) / (n - 1.0L); }
};

inline std::vector<PairStats> lag_pair_stats(const std::vector<Trajectory> &trajectories, int lag) {
  if (lag < 1) throw std::domain_error("lag must be >= 1");
  std::vector<PairStats> stats;
  stats.reserve(trajectories.size());
  for (const auto &traj : trajectories) {
    if (traj.length() <= lag) {
      throw std::domain_error("trajectories shorter than lag + 1");
    }
    PairStats s;
    for (int step = 1; step + lag <= traj.length(); ++step) {
      s.add(0.5L * traj.outcome_doubled(step), 0.5L * traj.outcome_doubled(step + lag));
    }
    stats.push_back(s);
  }
  return stats;
}

}  // namespace detail

/// Pooled lag-k sample covariance across trajectories, with a
/// delete-one-trajectory jackknife standard error (trajectories are the
/// independent units).
inline CovarianceEstimate empirical_lag_covariance(const std::vector<Trajectory> &trajectories, int lag) {
  if (trajectories.size() < 2) throw std::domain_error("need at least 2 trajectories");
  auto stats = detail::lag_pair_stats(trajectories, lag);
  detail::PairStats total;
  for (const auto &s : stats) total.accumulate(s);
  const long double estimate = total.covariance();

  const long double r = static_cast<long double>(stats.size());
  std::vector<long double> loo(stats.size());
  long double loo_mean = 0.0L;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    detail::PairStats rest = total;
    rest.subtract(stats[i]);
    loo[i] = rest.covariance();
    loo_mean += loo[i];
  }
  loo_mean /= r;
  long double ss = 0.0L;
  for (long double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  const long double se = std::sqrt((r - 1.0L) / r * ss);
  return {static_cast<double>(estimate), static_cast<double>(se)};
}

/// Pooled lag-k Pearson correlation. When every pair is (x, x) the three
/// second moments are the same accumulated value, so the result is exactly
/// 1.0, not 1.0 up to rounding.
inline double empirical_lag_correlation(const std::vector<Trajectory> &trajectories, int lag) {
  if (trajectories.size() < 2) throw std::domain_error("need at least 2 trajectories");
  auto stats = detail::lag_pair_stats(trajectories, lag);
  detail::PairStats t;
  for (const auto &s : stats) t.accumulate(s);
  const long double vx = t.sxx - t.sx * t.sx / t.n;
  const long double vy = t.syy - t.sy * t.sy / t.n;
  if (!(vx > 0.0L) || !(vy > 0.0L)) throw std::domain_error("correlation undefined: constant readouts");
  return static_cast<double>((t.sxy - t.sx * t.sy / t.n) / std::sqrt(vx * vy));
}

struct BreakEvenResult {
  bool unbounded = false;   // polarization 0: noise dominates at every size
  double bound = 0.0;       // (tan(angle/2) * polarization)^(-2)
  std::uint64_t max_spins = 0;
};

/// Largest ensemble size whose root-N noise magnetization still exceeds the
/// steady-state thermal signal of a repeated nutation-angle readout.
inline BreakEvenResult break_even_spin_count(double nutation_angle, double polarization) {
  if (!(nutation_angle > 0.0 && nutation_angle <= 1.5707963267948966 + 1e-12)) {
    throw std::domain_error("nutation angle must be in (0, pi/2]");
  }
  if (!(polarization >= 0.0 && polarization < 1.0)) {
    throw std::domain_error("polarization must be in [0, 1)");
  }
  BreakEvenResult out;
  if (polarization == 0.0) {
    out.unbounded = true;
    out.bound = std::numeric_limits<double>::infinity();
    out.max_spins = std::numeric_limits<std::uint64_t>::max();
    return out;
  }
  // sqrt((1-cos b)/(1+cos b)) == tan(b/2), better conditioned near 0.
  const double factor = std::tan(0.5 * nutation_angle) * polarization;
  out.bound = 1.0 / (factor * factor);
  out.max_spins = out.bound >= 1.8446744073709552e19
                      ? std::numeric_limits<std::uint64_t>::max()
                      : static_cast<std::uint64_t>(std::floor(out.bound));
  return out;
}

}  // namespace spinchain

#endif
