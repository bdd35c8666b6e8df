#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "pts/numkit/matrix.hpp"

namespace pts {

/// SplitMix64 generator (Steele, Lea, Flood). Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
///
/// The stream and the seed derivation below are fully specified by the
/// constants here, so hash tables can be regenerated in any language:
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// The SplitMix64 output finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by multiply-high reduction.
  std::uint64_t below(std::uint64_t bound) noexcept {
    __extension__ using u128 = unsigned __int128;
    const u128 wide = static_cast<u128>((*this)()) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Seed of the index-th child stream of `master`:
/// mix(master + (index + 1) * 0x9E3779B97F4A7C15).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return SplitMix64::mix(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// rows x cols matrix with i.i.d. Normal(0, stddev^2) entries.
inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double stddev,
                                   std::uint64_t seed) {
  SplitMix64 gen(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  DenseMatrix out(rows, cols);
  for (double& v : out.data()) v = normal(gen);
  return out;
}

/// rows x cols matrix with i.i.d. Uniform[lo, hi) entries.
inline DenseMatrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi,
                                  std::uint64_t seed) {
  SplitMix64 gen(seed);
  DenseMatrix out(rows, cols);
  for (double& v : out.data()) v = lo + (hi - lo) * gen.uniform();
  return out;
}

}  // namespace pts
