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

#ifndef SPINCHAIN_ORACLE_HPP
#define SPINCHAIN_ORACLE_HPP

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spinchain/chain.hpp"
#include "spinchain/channels.hpp"
#include "spinchain/measurement.hpp"
#include "spinchain/sector.hpp"

namespace spinchain {

// Brute-force 2^N density-matrix engine. It shares no arithmetic with the
// sector engine: states are full complex matrices in the computational
// basis (bit s of a basis index set = spin s up), channels act as Kraus
// operators or explicit affine maps, and readouts act as operator
// conjugation. Everything the sector engine computes must be reproducible
// here, which is what crosscheck() verifies.

inline constexpr int kMaxOracleSpins = 10;

using DenseMatrix = Eigen::MatrixXcd;

struct DenseState {
  int ensemble_size = 0;
  DenseMatrix rho;
};

inline void check_oracle_size(int n) {
  check_ensemble_size(n);
  if (n > kMaxOracleSpins) {
    throw std::domain_error("dense oracle supports at most " + std::to_string(kMaxOracleSpins) + " spins");
  }
}

inline int basis_dimension(int n) { return 1 << n; }

/// Up-spin count of a computational basis state.
inline int basis_sector_index(std::uint32_t basis) { return std::popcount(basis); }

inline DenseState dense_mixed_state(int n) {
  check_oracle_size(n);
  const int dim = basis_dimension(n);
  DenseState state{n, DenseMatrix::Zero(dim, dim)};
  const double p = 1.0 / static_cast<double>(dim);
  for (int b = 0; b < dim; ++b) state.rho(b, b) = p;
  return state;
}

/// N-fold product of the single-spin state with up-population `a` and
/// up-down coherence `b`. Entry (x, y) is the product of single-spin
/// matrix elements, one factor per spin.
inline DenseState dense_product_state(int n, double a, std::complex<double> b = {}) {
  check_oracle_size(n);
  if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("up population must be in [0, 1]");
  // Single-spin matrix indexed by bit value (1 = up).
  std::complex<double> single[2][2] = {{{1.0 - a, 0.0}, std::conj(b)}, {b, {a, 0.0}}};
  const int dim = basis_dimension(n);
  DenseState state{n, DenseMatrix(dim, dim)};
  for (int x = 0; x < dim; ++x) {
    for (int y = 0; y < dim; ++y) {
      std::complex<double> v = 1.0;
      for (int s = 0; s < n; ++s) v *= single[(x >> s) & 1][(y >> s) & 1];
      state.rho(x, y) = v;
    }
  }
  return state;
}

/// Mixture of uniform in-sector states with the given sector weights.
inline DenseState dense_sector_state(int n, const SectorDistribution &q) {
  check_oracle_size(n);
  if (q.ensemble_size != n) throw std::invalid_argument("dense_sector_state: dimension mismatch");
  const int dim = basis_dimension(n);
  DenseState state{n, DenseMatrix::Zero(dim, dim)};
  for (int b = 0; b < dim; ++b) {
    int i = basis_sector_index(static_cast<std::uint32_t>(b));
    double rank = static_cast<double>(exact_binomial_coefficient(n, i));
    state.rho(b, b) = q.probs[static_cast<std::size_t>(i)] / rank;
  }
  return state;
}

inline DenseState dense_initial_state(int n, const InitialStateSpec &spec) {
  switch (spec.kind) {
    case InitialStateKind::Mixed:
      return dense_mixed_state(n);
    case InitialStateKind::Product:
      return dense_product_state(n, spec.up_probability, spec.coherence);
    case InitialStateKind::Sector:
      if (!spec.sector_probs) throw std::invalid_argument("sector initial state needs a distribution");
      return dense_sector_state(n, *spec.sector_probs);
  }
  throw std::logic_error("unreachable initial state kind");
}

/// Projectors onto the fixed-magnetization subspaces, stored as diagonal
/// 0/1 vectors (they are diagonal in the computational basis).
inline std::vector<Eigen::VectorXd> dense_projectors(int n) {
  check_oracle_size(n);
  const int dim = basis_dimension(n);
  std::vector<Eigen::VectorXd> projectors(static_cast<std::size_t>(sector_count(n)),
                                          Eigen::VectorXd::Zero(dim));
  for (int b = 0; b < dim; ++b) {
    projectors[static_cast<std::size_t>(basis_sector_index(static_cast<std::uint32_t>(b)))](b) = 1.0;
  }
  return projectors;
}

/// Readout effects E_m = sum_l D(m, l) P_l and their square roots, all
/// diagonal so stored as vectors. The roots are exact: sqrt of a diagonal
/// is entrywise.
struct DensePovm {
  int ensemble_size = 0;
  std::vector<Eigen::VectorXd> effects;
  std::vector<Eigen::VectorXd> roots;
};

inline DensePovm dense_povm(const MeasurementKernel &kernel) {
  check_oracle_size(kernel.ensemble_size);
  const int n = kernel.ensemble_size;
  const int dim = basis_dimension(n);
  const int outcomes = sector_count(n);
  DensePovm povm;
  povm.ensemble_size = n;
  povm.effects.assign(static_cast<std::size_t>(outcomes), Eigen::VectorXd::Zero(dim));
  povm.roots.assign(static_cast<std::size_t>(outcomes), Eigen::VectorXd::Zero(dim));
  for (int m = 0; m < outcomes; ++m) {
    for (int b = 0; b < dim; ++b) {
      int l = basis_sector_index(static_cast<std::uint32_t>(b));
      double v = kernel.outcome_given_sector(static_cast<std::size_t>(m), static_cast<std::size_t>(l));
      povm.effects[static_cast<std::size_t>(m)](b) = v;
      povm.roots[static_cast<std::size_t>(m)](b) = std::sqrt(v);
    }
  }
  return povm;
}

inline SectorDistribution dense_outcome_distribution(const DensePovm &povm, const DenseState &state) {
  if (povm.ensemble_size != state.ensemble_size) {
    throw std::invalid_argument("dense_outcome_distribution: dimension mismatch");
  }
  std::vector<double> probs(povm.effects.size());
  long double total = 0.0L;
  for (std::size_t m = 0; m < povm.effects.size(); ++m) {
    long double p = 0.0L;
    for (int b = 0; b < state.rho.rows(); ++b) {
      p += povm.effects[m](b) * state.rho(b, b).real();
    }
    probs[m] = static_cast<double>(p);
    total += p;
  }
  for (double &p : probs) p = static_cast<double>(p / static_cast<double>(total));
  return {state.ensemble_size, std::move(probs)};
}

/// State update on outcome m: sqrt(E_m) rho sqrt(E_m) / P(m).
inline DenseState dense_posterior(const DensePovm &povm, const DenseState &state, int m_doubled) {
  const int n = state.ensemble_size;
  const auto &root = povm.roots[static_cast<std::size_t>(index_from_doubled(n, m_doubled))];
  const auto &effect = povm.effects[static_cast<std::size_t>(index_from_doubled(n, m_doubled))];
  long double prob = 0.0L;
  for (int b = 0; b < state.rho.rows(); ++b) prob += effect(b) * state.rho(b, b).real();
  if (!(prob > 0.0L)) {
    throw std::domain_error("dense_posterior: conditioning on impossible outcome " + std::to_string(m_doubled));
  }
  DenseState out{n, DenseMatrix(state.rho.rows(), state.rho.cols())};
  const double inv = static_cast<double>(1.0L / prob);
  for (int x = 0; x < state.rho.rows(); ++x) {
    for (int y = 0; y < state.rho.cols(); ++y) {
      out.rho(x, y) = root(x) * state.rho(x, y) * root(y) * inv;
    }
  }
  return out;
}

using SpinKraus = std::vector<Eigen::Matrix2cd>;

/// Kraus set of the per-spin channel, indexed by bit value (1 = up).
inline SpinKraus single_spin_kraus(const ChannelSpec &spec) {
  const std::complex<double> im(0.0, 1.0);
  if (spec.kind == ChannelKind::ProductFlips) {
    detail::check_probability(spec.alpha, "alpha");
    detail::check_probability(spec.beta, "beta");
    // Classical asymmetric flip: keep, up->down, down->up.
    Eigen::Matrix2cd keep = Eigen::Matrix2cd::Zero();
    keep(0, 0) = std::sqrt(1.0 - spec.beta);
    keep(1, 1) = std::sqrt(1.0 - spec.alpha);
    Eigen::Matrix2cd down = Eigen::Matrix2cd::Zero();
    down(0, 1) = std::sqrt(spec.alpha);
    Eigen::Matrix2cd up = Eigen::Matrix2cd::Zero();
    up(1, 0) = std::sqrt(spec.beta);
    return {keep, down, up};
  }
  if (spec.kind == ChannelKind::ProductFromRotation) {
    detail::check_probability(spec.lambda, "lambda");
    // Depolarize with weight lambda, then rotate about x with flip
    // amplitude sin(theta). The rotation keeps its coherent off-diagonal
    // action here; only the sector kernel drops it.
    const double c = std::cos(spec.theta), s = std::sin(spec.theta);
    Eigen::Matrix2cd u;
    u << c, -im * s, -im * s, c;
    Eigen::Matrix2cd x, y, z, id = Eigen::Matrix2cd::Identity();
    x << 0, 1, 1, 0;
    y << 0, -im, im, 0;
    z << 1, 0, 0, -1;
    const double keep = std::sqrt(1.0 - spec.lambda);
    const double mix = 0.5 * std::sqrt(spec.lambda);
    return {keep * u, mix * id, mix * x, mix * y, mix * z};
  }
  throw std::invalid_argument("single_spin_kraus: not a product channel");
}

/// rho -> sum_k (K_k on spin `spin`) rho (K_k on spin `spin`)^dagger.
inline void apply_single_spin_kraus(DenseMatrix &rho, const SpinKraus &kraus, int spin) {
  const int dim = static_cast<int>(rho.rows());
  const int bit = 1 << spin;
  DenseMatrix next = DenseMatrix::Zero(dim, dim);
  for (int x = 0; x < dim; ++x) {
    if (x & bit) continue;  // enumerate row pairs (x, x|bit)
    for (int y = 0; y < dim; ++y) {
      if (y & bit) continue;
      const std::complex<double> block[2][2] = {
          {rho(x, y), rho(x, y | bit)},
          {rho(x | bit, y), rho(x | bit, y | bit)},
      };
      for (const auto &k : kraus) {
        for (int r = 0; r < 2; ++r) {
          for (int c = 0; c < 2; ++c) {
            std::complex<double> v = 0.0;
            for (int a = 0; a < 2; ++a) {
              for (int b = 0; b < 2; ++b) {
                v += k(r, a) * block[a][b] * std::conj(k(c, b));
              }
            }
            next(r ? (x | bit) : x, c ? (y | bit) : y) += v;
          }
        }
      }
    }
  }
  rho = std::move(next);
}

inline DenseState dense_channel(const ChannelSpec &spec, const DenseState &state) {
  const int n = state.ensemble_size;
  check_oracle_size(n);
  switch (spec.kind) {
    case ChannelKind::CollectiveDepolarizing: {
      detail::check_probability(spec.lambda, "lambda");
      DenseState out{n, ((1.0 - spec.lambda) * state.rho).eval()};
      const double p = spec.lambda / static_cast<double>(basis_dimension(n));
      for (int b = 0; b < out.rho.rows(); ++b) out.rho(b, b) += p;
      return out;
    }
    case ChannelKind::EpsilonPolarizing: {
      detail::check_probability(spec.lambda, "lambda");
      if (!spec.reference) throw std::invalid_argument("epsilon-polarizing channel needs a reference distribution");
      DenseState target = dense_sector_state(n, *spec.reference);
      DenseState out{n, ((1.0 - spec.lambda) * state.rho + spec.lambda * target.rho).eval()};
      return out;
    }
    case ChannelKind::ProductFlips:
    case ChannelKind::ProductFromRotation: {
      SpinKraus kraus = single_spin_kraus(spec);
      DenseState out{n, state.rho};
      for (int s = 0; s < n; ++s) apply_single_spin_kraus(out.rho, kraus, s);
      return out;
    }
  }
  throw std::logic_error("unreachable channel kind");
}

/// Sector populations Tr[P_k rho].
inline SectorDistribution dense_sector_populations(const DenseState &state) {
  const int n = state.ensemble_size;
  std::vector<long double> acc(static_cast<std::size_t>(sector_count(n)), 0.0L);
  for (int b = 0; b < state.rho.rows(); ++b) {
    acc[static_cast<std::size_t>(basis_sector_index(static_cast<std::uint32_t>(b)))] += state.rho(b, b).real();
  }
  std::vector<double> probs(acc.size());
  long double total = 0.0L;
  for (long double v : acc) total += v;
  for (std::size_t i = 0; i < acc.size(); ++i) probs[i] = static_cast<double>(acc[i] / total);
  return {n, std::move(probs)};
}

/// Largest entrywise distance between rho and the uniform in-sector mixture
/// with the same sector populations. Zero means the state carries no
/// information beyond its sector weights.
inline double max_deviation_from_sector_uniform(const DenseState &state) {
  const int n = state.ensemble_size;
  SectorDistribution pops = dense_sector_populations(state);
  double worst = 0.0;
  for (int x = 0; x < state.rho.rows(); ++x) {
    const int sx = basis_sector_index(static_cast<std::uint32_t>(x));
    for (int y = 0; y < state.rho.cols(); ++y) {
      std::complex<double> expected = 0.0;
      if (x == y) {
        expected = pops.probs[static_cast<std::size_t>(sx)] /
                   static_cast<double>(exact_binomial_coefficient(n, sx));
      }
      worst = std::max(worst, std::abs(state.rho(x, y) - expected));
    }
  }
  return worst;
}

struct CrosscheckRound {
  int round = 0;
  double max_total_variation = 0.0;
  double max_uniformity_deviation = 0.0;  // over posteriors formed this round
};

struct CrosscheckReport {
  double tolerance = 0.0;
  int rounds_run = 0;
  bool pass = false;  // every total-variation distance within tolerance
  double max_total_variation = 0.0;
  double max_uniformity_deviation = 0.0;
  std::vector<CrosscheckRound> rounds;
};

/// Runs the dense and sector engines side by side over the full outcome
/// tree (no sampling): at every node both predictive distributions are
/// compared, then both engines condition on each feasible outcome and
/// evolve. `corrupt_kernel_for_test` biases one sector-kernel column so the
/// negative path of the report is exercised by tests.
inline CrosscheckReport crosscheck(const RunConfig &config, int rounds, double tolerance,
                                   bool corrupt_kernel_for_test = false) {
  check_oracle_size(config.ensemble_size);
  if (rounds < 1) throw std::domain_error("crosscheck needs at least one measurement round");

  RunConfig local = config;
  local.steps = rounds;
  ChainContext ctx = make_context(local);
  DensePovm povm = dense_povm(ctx.kernel);  // dense side keeps the pristine kernel
  if (corrupt_kernel_for_test) {
    Matrix &d = ctx.kernel.outcome_given_sector;
    const std::size_t dim = d.rows;
    double shift = 1e-3 * d(0, 0);
    d(0, 0) -= shift;
    d(dim - 1, 0) += shift;
  }
  DenseState rho0 = dense_initial_state(config.ensemble_size, config.initial);

  CrosscheckReport report;
  report.tolerance = tolerance;
  report.rounds_run = rounds;
  report.rounds.resize(static_cast<std::size_t>(rounds));
  for (int r = 0; r < rounds; ++r) report.rounds[static_cast<std::size_t>(r)].round = r + 1;

  const double prune = 1e-12;
  auto walk = [&](auto &&self, const SectorDistribution &q, const DenseState &rho, int round) -> void {
    SectorDistribution ps = outcome_distribution(ctx.kernel, q);
    SectorDistribution pd = dense_outcome_distribution(povm, rho);
    auto &slot = report.rounds[static_cast<std::size_t>(round - 1)];
    slot.max_total_variation = std::max(slot.max_total_variation, total_variation(ps, pd));
    for (std::size_t i = 0; i < ps.probs.size(); ++i) {
      if (std::max(ps.probs[i], pd.probs[i]) <= prune) continue;
      int d = doubled_from_index(config.ensemble_size, static_cast<int>(i));
      SectorDistribution qs = posterior_update(ctx.kernel, q, d);
      DenseState rs = dense_posterior(povm, rho, d);
      slot.max_uniformity_deviation =
          std::max(slot.max_uniformity_deviation, max_deviation_from_sector_uniform(rs));
      if (round < rounds) {
        self(self, apply_channel(ctx.transition, qs), dense_channel(config.channel, rs), round + 1);
      }
    }
  };
  walk(walk, ctx.initial, rho0, 1);

  for (const auto &r : report.rounds) {
    report.max_total_variation = std::max(report.max_total_variation, r.max_total_variation);
    report.max_uniformity_deviation = std::max(report.max_uniformity_deviation, r.max_uniformity_deviation);
  }
  report.pass = report.max_total_variation <= tolerance;
  return report;
}

}  // namespace spinchain

#endif
