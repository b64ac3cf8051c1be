// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace pcc {

/// One SplitMix64 step; advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Folds a sequence of words into one 64-bit key with SplitMix64 mixing.
/// Used to derive independent per-task streams.
std::uint64_t mix_keys(std::initializer_list<std::uint64_t> words) noexcept;

/// FNV-1a over a string; stable identifier for sample names.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// xoshiro256** generator with platform-stable derived distributions.
///
/// Only the transcendental-based draws (normal, unit_vector) can differ in the
/// last bits across libm implementations; integer and uniform draws are exact.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  bool coin() noexcept { return (next() >> 63) != 0; }

  /// Standard normal draw (Marsaglia polar method).
  double normal() noexcept;

  /// Uniformly distributed direction on the unit sphere.
  Eigen::Vector3d unit_vector() noexcept;

  /// Gamma(shape, 1) draw, Marsaglia-Tsang.
  double gamma(double shape) noexcept;

  /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t s_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Stream key for one (seed, kind, severity, sample) task.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t kind, std::uint64_t severity,
                                std::uint64_t sample) noexcept {
  return mix_keys({seed, kind, severity, sample});
}

}  // namespace pcc
