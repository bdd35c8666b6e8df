#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pts/coeffs/coeffs.hpp"
#include "pts/numkit/matrix.hpp"

namespace pts::coreset {

/// Result of greedy k-center: centers are indices into the point set,
/// mapping[i] is the position (0..k-1) of the center nearest to point i.
struct CoresetAssignment {
  std::vector<std::size_t> center_indices;
  std::vector<std::size_t> mapping;
  Vector distortions;  // ||u_i - center_{mapping[i]}||
  double epsilon = 0.0;  // sum of distortions

  std::size_t k() const noexcept { return center_indices.size(); }
  /// |{i : mapping[i] == c}| for every center c.
  Vector cluster_sizes() const;
  double radius() const;  // max distortion
};

/// Farthest-point clustering. The first center is drawn uniformly from the
/// seed; every later center is the point farthest from the current centers
/// (lowest index on ties, existing centers excluded). Points map to the
/// nearest center, ties to the earliest chosen. O(n d k).
CoresetAssignment greedy_k_center(const DenseMatrix& points, std::size_t k, std::uint64_t seed);

/// Same, with the first center given explicitly.
CoresetAssignment greedy_k_center_from(const DenseMatrix& points, std::size_t k, std::size_t first);

/// Exact optimal k-center radius with centers restricted to input points,
/// by enumerating all k-subsets. n <= 12.
double optimal_k_center_oracle(const DenseMatrix& points, std::size_t k);

enum class CoresetSide { U, V };

struct CoresetFit {
  coeffs::CoeffSolution solution;
  CoresetAssignment assignment;  // of the chosen side
  CoresetSide side = CoresetSide::U;
  double epsilon_u = 0.0;
  double epsilon_v = 0.0;
  coeffs::MomentSystem moments;  // weighted coreset system
};

/// Clusters U and V and builds the weighted coreset moment system for the
/// chosen side; `solution` is left empty.
CoresetFit coreset_moments(const DenseMatrix& u, const DenseMatrix& v, const coeffs::ScalarFunction& f,
                           std::size_t r, std::size_t k, std::uint64_t seed,
                           coeffs::Basis basis = coeffs::Basis::Monomial);

/// Coefficients from a coreset of rows: cluster U and V, keep the side with
/// the smaller eps_side * (norm sum of the other side) (ties keep U), and
/// solve the ridge system over center-row x other-side entries weighted by
/// cluster size. The regularizer uses the full U and V.
CoresetFit fit_coreset_coefficients(const DenseMatrix& u, const DenseMatrix& v, const coeffs::ScalarFunction& f,
                                    std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed,
                                    coeffs::Basis basis = coeffs::Basis::Monomial);

coeffs::CoeffSolution coreset_coefficients(const DenseMatrix& u, const DenseMatrix& v,
                                           const coeffs::ScalarFunction& f, std::size_t m, std::size_t r,
                                           std::size_t k, std::uint64_t seed,
                                           coeffs::Basis basis = coeffs::Basis::Monomial);

}  // namespace pts::coreset
