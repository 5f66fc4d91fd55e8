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

#ifndef SPINCHAIN_RNG_HPP
#define SPINCHAIN_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace spinchain {

/// SplitMix64 finalizer (Steele, Lea, Flood). Used only to derive stream
/// seeds, never as the sampling generator itself.
inline std::uint64_t split_mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based stream id: a pure function of (seed, index), so trajectory
/// k draws the same numbers no matter which thread runs it.
inline std::uint64_t derive_stream_id(std::uint64_t seed, std::uint64_t index) {
  return split_mix64(split_mix64(seed) ^ split_mix64(index + 0x9E3779B97F4A7C15ULL));
}

class TrajectoryStream {
 public:
  TrajectoryStream(std::uint64_t seed, std::uint64_t index)
      : id_(derive_stream_id(seed, index)), engine_(id_) {}

  std::uint64_t id() const { return id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) built from the top 53 bits. Avoids
  /// std::uniform_real_distribution, whose output is implementation-defined.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t id_;
  std::mt19937_64 engine_;
};

/// Inverse-CDF draw: smallest index with cumsum(probs) > u * sum(probs).
/// Scaling by the actual sum keeps the draw well-defined even when the
/// vector is normalized only to rounding.
inline std::size_t sample_index(std::span<const double> probs, double u) {
  if (probs.empty()) throw std::invalid_argument("sample_index: empty distribution");
  long double total = 0.0L;
  for (double p : probs) total += p;
  if (total <= 0.0L) throw std::domain_error("sample_index: non-positive total mass");
  const long double target = static_cast<long double>(u) * total;
  long double cum = 0.0L;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    cum += probs[i];
    if (cum > target && probs[i] > 0.0) return i;
  }
  return last_positive;
}

}  // namespace spinchain

#endif
