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

#ifndef SPINCHAIN_SECTOR_HPP
#define SPINCHAIN_SECTOR_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinchain {

// Magnetization bookkeeping convention used across the whole library:
// a size-N ensemble has N+1 sectors. Externally a sector is named by its
// doubled magnetization d = 2m (always an integer, even for odd N);
// internally by the dense index i = (d + N) / 2, which equals the number
// of up spins. All index/unit conversions live here.

inline void check_ensemble_size(int n) {
  if (n < 1) throw std::domain_error("ensemble size must be >= 1");
}

/// Number of sectors (distribution / kernel dimension).
inline int sector_count(int n) { return n + 1; }

inline bool valid_doubled(int n, int d) {
  return d >= -n && d <= n && ((d + n) % 2 == 0);
}

inline int index_from_doubled(int n, int d) {
  check_ensemble_size(n);
  if (!valid_doubled(n, d)) {
    throw std::domain_error("doubled magnetization " + std::to_string(d) +
                            " invalid for ensemble size " + std::to_string(n));
  }
  return (d + n) / 2;
}

inline int doubled_from_index(int n, int i) { return 2 * i - n; }

/// Magnetization in spin units (half-integers when N is odd).
inline double magnetization_from_index(int n, int i) {
  return 0.5 * doubled_from_index(n, i);
}

struct SectorIndex {
  int ensemble_size = 0;
  int index = 0;  // up-spin count, in [0, N]

  int doubled() const { return doubled_from_index(ensemble_size, index); }
  double magnetization() const { return magnetization_from_index(ensemble_size, index); }

  static SectorIndex from_doubled(int n, int d) { return {n, index_from_doubled(n, d)}; }
};

namespace detail {

/// Prefix sums of log(k) in extended precision. lgamma alone is good to a
/// couple of ulp of a large result, which is not enough for the 1e-12-level
/// kernel identities this library asserts.
class LogFactorials {
 public:
  explicit LogFactorials(std::size_t max_n) : sums_(max_n + 1, 0.0L) {
    for (std::size_t k = 2; k <= max_n; ++k) {
      sums_[k] = sums_[k - 1] + std::log(static_cast<long double>(k));
    }
  }

  std::size_t max_n() const { return sums_.size() - 1; }
  long double operator()(std::size_t k) const { return sums_[k]; }

  long double log_choose(std::size_t n, std::size_t k) const {
    return sums_[n] - sums_[k] - sums_[n - k];
  }

 private:
  std::vector<long double> sums_;
};

/// Shared, lazily grown table. Growth swaps in a fresh immutable snapshot so
/// concurrent readers never observe a resize.
inline std::shared_ptr<const LogFactorials> shared_log_factorials(std::size_t need) {
  static std::mutex mu;
  static std::shared_ptr<const LogFactorials> table;
  std::lock_guard<std::mutex> lock(mu);
  if (!table || table->max_n() < need) {
    std::size_t grow = std::max<std::size_t>(need, table ? table->max_n() * 2 : 256);
    table = std::make_shared<const LogFactorials>(grow);
  }
  return table;
}

}  // namespace detail

/// ln C(n, k) via the extended-precision log-factorial table.
inline double log_binomial_coefficient(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) throw std::domain_error("log_binomial_coefficient: need 0 <= k <= n");
  auto table = detail::shared_log_factorials(static_cast<std::size_t>(n));
  return static_cast<double>(table->log_choose(static_cast<std::size_t>(n), static_cast<std::size_t>(k)));
}

/// ln[ C(n,k) p^k (1-p)^(n-k) ], with exact handling of p in {0, 1}:
/// the pmf is a point mass there, so the result is 0 or -infinity.
inline double log_binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  if (n < 0 || k < 0 || k > n) throw std::domain_error("log_binomial_pmf: need 0 <= k <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("log_binomial_pmf: p must be in [0, 1]");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
  if (p == 1.0) return k == n ? 0.0 : kNegInf;
  auto table = detail::shared_log_factorials(static_cast<std::size_t>(n));
  long double value = table->log_choose(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
  value += static_cast<long double>(k) * std::log(static_cast<long double>(p));
  value += static_cast<long double>(n - k) * std::log1p(static_cast<long double>(-p));
  return static_cast<double>(value);
}

/// Exact C(n, k) for n <= 64 (the largest n whose central binomial still
/// fits in 64 bits). Intermediate products use 128-bit arithmetic.
inline std::uint64_t exact_binomial_coefficient(int n, int k) {
  if (n < 0 || k < 0 || k > n) throw std::domain_error("exact_binomial_coefficient: need 0 <= k <= n");
  if (n > 64) throw std::domain_error("exact_binomial_coefficient: n must be <= 64");
  if (k > n - k) k = n - k;
  unsigned __int128 c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  }
  return static_cast<std::uint64_t>(c);
}

struct SectorMultiplicity {
  double log_value = 0.0;
  std::optional<std::uint64_t> exact;  // present for N <= 64
};

/// Dimension of the magnetization-d/2 eigenspace: C(N, N/2 + m).
inline SectorMultiplicity sector_multiplicity(int n, int m_doubled) {
  int i = index_from_doubled(n, m_doubled);
  SectorMultiplicity out;
  out.log_value = log_binomial_coefficient(n, i);
  if (n <= 64) out.exact = exact_binomial_coefficient(n, i);
  return out;
}

/// Multiplicity of the total-spin-j irrep in the N-fold product of spin
/// halves: C(N, N/2 + j) - C(N, N/2 + j + 1). j is passed doubled, like
/// every other magnitude in the API.
inline std::uint64_t irrep_multiplicity(int n, int j_doubled) {
  check_ensemble_size(n);
  if (n > 64) throw std::domain_error("irrep_multiplicity: exact path requires n <= 64");
  if (j_doubled < 0 || j_doubled > n || ((j_doubled + n) % 2 != 0)) {
    throw std::domain_error("irrep_multiplicity: doubled j " + std::to_string(j_doubled) +
                            " out of range for ensemble size " + std::to_string(n));
  }
  int upper = (n + j_doubled) / 2;
  std::uint64_t first = exact_binomial_coefficient(n, upper);
  std::uint64_t second = upper + 1 > n ? 0 : exact_binomial_coefficient(n, upper + 1);
  return first - second;
}

struct SectorDistribution {
  int ensemble_size = 0;
  std::vector<double> probs;  // index i = up-spin count

  double at_doubled(int d) const { return probs[static_cast<std::size_t>(index_from_doubled(ensemble_size, d))]; }
};

inline double distribution_sum(const std::vector<double> &probs) {
  long double total = 0.0L;
  for (double p : probs) total += p;
  return static_cast<double>(total);
}

/// Validates shape/positivity, then renormalizes exactly so downstream sums
/// stay at rounding level. Inputs more than `tolerance` away from unit mass
/// are configuration errors, not data to be silently rescaled.
inline SectorDistribution make_sector_distribution(int n, std::vector<double> probs,
                                                   double tolerance = 1e-9) {
  check_ensemble_size(n);
  if (probs.size() != static_cast<std::size_t>(sector_count(n))) {
    throw std::invalid_argument("sector distribution needs " + std::to_string(sector_count(n)) +
                                " entries, got " + std::to_string(probs.size()));
  }
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::domain_error("sector probabilities must be finite and >= 0");
  }
  double total = distribution_sum(probs);
  if (std::abs(total - 1.0) > tolerance) {
    throw std::domain_error("sector distribution sums to " + std::to_string(total) + ", not 1");
  }
  for (double &p : probs) p /= total;
  return {n, std::move(probs)};
}

/// Sector populations of the maximally mixed N-spin state: C(N,i)/2^N.
/// For N <= 64 the entries are exact binomials scaled by a power of two.
inline SectorDistribution mixed_sector_distribution(int n) {
  check_ensemble_size(n);
  std::vector<double> probs(static_cast<std::size_t>(sector_count(n)));
  if (n <= 64) {
    for (int i = 0; i <= n; ++i) {
      probs[static_cast<std::size_t>(i)] = std::ldexp(static_cast<double>(exact_binomial_coefficient(n, i)), -n);
    }
  } else {
    auto table = detail::shared_log_factorials(static_cast<std::size_t>(n));
    const long double log2v = std::log(2.0L);
    for (int i = 0; i <= n; ++i) {
      probs[static_cast<std::size_t>(i)] =
          static_cast<double>(std::exp(table->log_choose(n, static_cast<std::size_t>(i)) - n * log2v));
    }
  }
  return make_sector_distribution(n, std::move(probs), 1e-9);
}

/// Sector populations of a product state where each spin points up with
/// probability `up_probability`: Bin(N, i, a).
inline SectorDistribution binomial_sector_distribution(int n, double up_probability) {
  check_ensemble_size(n);
  if (!(up_probability >= 0.0 && up_probability <= 1.0)) {
    throw std::domain_error("up probability must be in [0, 1]");
  }
  std::vector<double> probs(static_cast<std::size_t>(sector_count(n)));
  for (int i = 0; i <= n; ++i) {
    probs[static_cast<std::size_t>(i)] = std::exp(log_binomial_pmf(n, i, up_probability));
  }
  return make_sector_distribution(n, std::move(probs), 1e-9);
}

inline SectorDistribution delta_sector_distribution(int n, int m_doubled) {
  int i = index_from_doubled(n, m_doubled);
  std::vector<double> probs(static_cast<std::size_t>(sector_count(n)), 0.0);
  probs[static_cast<std::size_t>(i)] = 1.0;
  return {n, std::move(probs)};
}

struct Moments {
  double mean = 0.0;
  double std_dev = 0.0;
};

/// Mean and standard deviation of the magnetization (spin units, so
/// half-integer values appear for odd N).
inline Moments moments(const SectorDistribution &q) {
  check_ensemble_size(q.ensemble_size);
  if (std::abs(distribution_sum(q.probs) - 1.0) > 1e-9) {
    throw std::domain_error("moments: distribution is not normalized");
  }
  long double mean = 0.0L, second = 0.0L;
  for (std::size_t i = 0; i < q.probs.size(); ++i) {
    long double m = magnetization_from_index(q.ensemble_size, static_cast<int>(i));
    mean += m * q.probs[i];
    second += m * m * q.probs[i];
  }
  long double var = second - mean * mean;
  if (var < 0.0L) var = 0.0L;
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var))};
}

/// Half the L1 distance between two sector distributions.
inline double total_variation(const SectorDistribution &a, const SectorDistribution &b) {
  if (a.ensemble_size != b.ensemble_size) throw std::invalid_argument("total_variation: dimension mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.probs.size(); ++i) acc += std::abs(a.probs[i] - b.probs[i]);
  return static_cast<double>(0.5L * acc);
}

}  // namespace spinchain

#endif
