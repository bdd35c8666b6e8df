#include "pts/coreset/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pts/error.hpp"
#include "pts/numkit/random.hpp"

namespace pts::coreset {

namespace {

double distance(const DenseMatrix& p, std::size_t i, std::size_t j) {
  return std::sqrt(squared_distance(p.row(i), p.row(j)));
}

double row_norm_sum(const DenseMatrix& x) {
  double s = 0.0;
  for (double sq : row_squared_norms(x)) s += std::sqrt(sq);
  return s;
}

}  // namespace

Vector CoresetAssignment::cluster_sizes() const {
  Vector sizes(center_indices.size(), 0.0);
  for (std::size_t c : mapping) sizes[c] += 1.0;
  return sizes;
}

double CoresetAssignment::radius() const {
  double r = 0.0;
  for (double d : distortions) r = std::max(r, d);
  return r;
}

CoresetAssignment greedy_k_center(const DenseMatrix& points, std::size_t k, std::uint64_t seed) {
  if (points.rows() == 0) throw InvalidArgument("greedy_k_center: empty point set");
  SplitMix64 gen(seed);
  return greedy_k_center_from(points, k, static_cast<std::size_t>(gen.below(points.rows())));
}

CoresetAssignment greedy_k_center_from(const DenseMatrix& points, std::size_t k, std::size_t first) {
  const std::size_t n = points.rows();
  if (k == 0) throw InvalidArgument("greedy_k_center: k must be >= 1");
  if (k > n) {
    throw InvalidArgument("greedy_k_center: k = " + std::to_string(k) + " exceeds " + std::to_string(n) +
                          " points");
  }
  if (first >= n) throw InvalidArgument("greedy_k_center: first center out of range");

  CoresetAssignment out;
  std::vector<bool> is_center(n, false);
  std::size_t a = first;
  out.center_indices.push_back(a);
  is_center[a] = true;

  Vector delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = distance(points, i, a);

  while (out.center_indices.size() < k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_center[i]) continue;
      if (best == n || delta[i] > delta[best]) best = i;
    }
    a = best;
    out.center_indices.push_back(a);
    is_center[a] = true;
    for (std::size_t i = 0; i < n; ++i) delta[i] = std::min(delta[i], distance(points, i, a));
  }

  out.mapping.resize(n);
  out.distortions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double d = distance(points, i, out.center_indices[c]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    out.mapping[i] = arg;
    out.distortions[i] = best;
  }
  out.epsilon = 0.0;
  for (double d : out.distortions) out.epsilon += d;
  return out;
}

double optimal_k_center_oracle(const DenseMatrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  if (n > 12) throw InvalidArgument("optimal_k_center_oracle: limited to n <= 12");
  if (k == 0 || k > n) throw InvalidArgument("optimal_k_center_oracle: need 1 <= k <= n");

  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    double radius = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < n; ++c)
        if (pick[c]) nearest = std::min(nearest, distance(points, i, c));
      radius = std::max(radius, nearest);
    }
    best = std::min(best, radius);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

CoresetFit coreset_moments(const DenseMatrix& u, const DenseMatrix& v, const coeffs::ScalarFunction& f,
                           std::size_t r, std::size_t k, std::uint64_t seed, coeffs::Basis basis) {
  if (u.cols() != v.cols()) throw DimensionMismatch("coreset_coefficients: U and V column counts differ");

  CoresetAssignment au = greedy_k_center(u, k, derive_seed(seed, 0));
  CoresetAssignment av = greedy_k_center(v, k, derive_seed(seed, 1));

  CoresetFit fit;
  fit.epsilon_u = au.epsilon;
  fit.epsilon_v = av.epsilon;
  // keep the side whose distortion term eps_side * sum ||other rows|| is smaller
  fit.side = au.epsilon * row_norm_sum(v) <= av.epsilon * row_norm_sum(u) ? CoresetSide::U : CoresetSide::V;

  const double a = basis == coeffs::Basis::Chebyshev ? coeffs::chebyshev_interval(u, v) : 0.0;
  if (fit.side == CoresetSide::U) {
    const DenseMatrix centers = select_rows(u, au.center_indices);
    const Vector weights = au.cluster_sizes();
    fit.moments = coeffs::weighted_moments(centers, v, weights, {}, f, r, basis, a);
    fit.assignment = std::move(au);
  } else {
    const DenseMatrix centers = select_rows(v, av.center_indices);
    const Vector weights = av.cluster_sizes();
    fit.moments = coeffs::weighted_moments(u, centers, {}, weights, f, r, basis, a);
    fit.assignment = std::move(av);
  }
  return fit;
}

CoresetFit fit_coreset_coefficients(const DenseMatrix& u, const DenseMatrix& v, const coeffs::ScalarFunction& f,
                                    std::size_t m, std::size_t r, std::size_t k, std::uint64_t seed,
                                    coeffs::Basis basis) {
  CoresetFit fit = coreset_moments(u, v, f, r, k, seed, basis);
  const coeffs::Regularizer w = coeffs::build_regularizer(u, v, m, r);
  fit.solution = coeffs::solve(fit.moments, w);
  fit.solution.solver = coeffs::Solver::Coreset;
  return fit;
}

coeffs::CoeffSolution coreset_coefficients(const DenseMatrix& u, const DenseMatrix& v,
                                           const coeffs::ScalarFunction& f, std::size_t m, std::size_t r,
                                           std::size_t k, std::uint64_t seed, coeffs::Basis basis) {
  return fit_coreset_coefficients(u, v, f, m, r, k, seed, basis).solution;
}

}  // namespace pts::coreset
