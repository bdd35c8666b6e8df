#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pts/coreset/coreset.hpp"
#include "pts/error.hpp"
#include "pts/numkit/random.hpp"

using namespace pts;
using namespace pts::coreset;

namespace {

const coeffs::ScalarFunction kExp = [](double x) { return std::exp(x); };

DenseMatrix line(std::initializer_list<double> xs) {
  DenseMatrix p(xs.size(), 1);
  std::size_t i = 0;
  for (double x : xs) p(i++, 0) = x;
  return p;
}

DenseMatrix blobs(std::size_t n, std::size_t d, std::size_t clusters, double spread, std::uint64_t seed) {
  const DenseMatrix centers = gaussian_matrix(clusters, d, 1.0 / std::sqrt(static_cast<double>(d)), derive_seed(seed, 0));
  const DenseMatrix noise = gaussian_matrix(n, d, spread, derive_seed(seed, 1));
  DenseMatrix p(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) p(i, j) = centers(i % clusters, j) + noise(i, j);
  return p;
}

double gap(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void check_invariants(const DenseMatrix& p, const CoresetAssignment& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double best = INFINITY;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < a.k(); ++c) {
      double dist = 0.0;
      for (std::size_t j = 0; j < p.cols(); ++j) {
        const double t = p(i, j) - p(a.center_indices[c], j);
        dist += t * t;
      }
      dist = std::sqrt(dist);
      if (dist < best) {
        best = dist;
        arg = c;
      }
    }
    CHECK(a.mapping[i] == arg);
    CHECK(std::abs(a.distortions[i] - best) < 1e-12);
    sum += a.distortions[i];
  }
  for (std::size_t c = 0; c < a.k(); ++c) CHECK(a.distortions[a.center_indices[c]] == 0.0);
  CHECK(std::abs(a.epsilon - sum) < 1e-10);
}

}  // namespace

TEST_CASE("greedy k-center on four points") {
  const DenseMatrix p = line({0, 1, 9, 10});
  const CoresetAssignment a = greedy_k_center_from(p, 2, 0);
  REQUIRE(a.k() == 2);
  CHECK(a.center_indices[0] == 0);
  CHECK(a.center_indices[1] == 3);
  CHECK(a.mapping == std::vector<std::size_t>{0, 0, 1, 1});
  CHECK(a.epsilon == doctest::Approx(2.0));
  CHECK(a.radius() == doctest::Approx(1.0));
  const Vector sizes = a.cluster_sizes();
  CHECK(sizes[0] == 2);
  CHECK(sizes[1] == 2);
  check_invariants(p, a);
}

TEST_CASE("degenerate k-center cases") {
  const DenseMatrix p = uniform_matrix(9, 3, -1.0, 1.0, 2);
  const CoresetAssignment all = greedy_k_center(p, 9, 5);
  CHECK(all.epsilon == 0.0);
  for (std::size_t i = 0; i < 9; ++i) CHECK(all.center_indices[all.mapping[i]] == i);

  const DenseMatrix same(6, 2, 0.7);
  CHECK(greedy_k_center(same, 1, 3).epsilon == 0.0);
  const CoresetAssignment dup = greedy_k_center(same, 3, 3);
  CHECK(dup.k() == 3);
  CHECK(dup.epsilon == 0.0);

  CHECK_THROWS_AS(greedy_k_center(p, 10, 0), InvalidArgument);
  CHECK_THROWS_AS(greedy_k_center(p, 0, 0), InvalidArgument);
}

TEST_CASE("assignment invariants and determinism") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const DenseMatrix p = gaussian_matrix(40, 3, 1.0, 50 + s);
    const CoresetAssignment a = greedy_k_center(p, 1 + s % 7, s);
    check_invariants(p, a);
    const CoresetAssignment b = greedy_k_center(p, 1 + s % 7, s);
    CHECK(a.center_indices == b.center_indices);
    CHECK(a.mapping == b.mapping);
  }
}

TEST_CASE("epsilon does not grow with k") {
  const DenseMatrix p = gaussian_matrix(60, 4, 1.0, 9);
  double prev = INFINITY;
  for (std::size_t k = 1; k <= 60; ++k) {
    const double e = greedy_k_center(p, k, 12).epsilon;
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("optimal radius oracle") {
  CHECK(optimal_k_center_oracle(line({0, 10}), 2) == 0.0);
  CHECK(optimal_k_center_oracle(line({0, 1, 9, 10}), 2) == doctest::Approx(1.0));
  CHECK(optimal_k_center_oracle(line({0, 1, 9, 10}), 1) == doctest::Approx(9.0));
  CHECK_THROWS_AS(optimal_k_center_oracle(DenseMatrix(13, 1), 2), InvalidArgument);
}

TEST_CASE("greedy is a 2-approximation") {
  SplitMix64 g(4);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const std::size_t n = 1 + g.below(10);
    const std::size_t k = 1 + g.below(std::min<std::size_t>(3, n));
    const DenseMatrix p = uniform_matrix(n, 2, 0.0, 1.0, 1000 + s);
    const double opt = optimal_k_center_oracle(p, k);
    CHECK(greedy_k_center(p, k, s).radius() <= 2.0 * opt + 1e-12);
  }
}

TEST_CASE("coreset at k = n is the exact solve") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::size_t n = 12 + s;
    const DenseMatrix u = gaussian_matrix(n, 4, 0.5, 70 + s), v = gaussian_matrix(n, 4, 0.5, 80 + s);
    const std::size_t r = 5;
    const coeffs::CoeffSolution exact =
        coeffs::solve_ridge(coeffs::moments_full(u, v, kExp, r), coeffs::build_regularizer(u, v, 10, r));
    const coeffs::CoeffSolution core = coreset_coefficients(u, v, kExp, 10, r, n, s);
    for (std::size_t i = 0; i <= r; ++i) CHECK(std::abs(core.monomial_coeffs[i] - exact.monomial_coeffs[i]) < 1e-8);
  }
}

TEST_CASE("duplicate prototypes give an exact coreset") {
  const DenseMatrix proto = gaussian_matrix(4, 3, 0.5, 90);
  DenseMatrix u(20, 3);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 3; ++j) u(i, j) = proto(i % 4, j);
  const DenseMatrix v = gaussian_matrix(15, 3, 0.5, 91);
  const std::size_t r = 4;
  const CoresetFit fit = fit_coreset_coefficients(u, v, kExp, 10, r, 4, 7);
  CHECK(fit.epsilon_u == 0.0);
  CHECK(fit.side == CoresetSide::U);
  const coeffs::CoeffSolution exact =
      coeffs::solve_ridge(coeffs::moments_full(u, v, kExp, r), coeffs::build_regularizer(u, v, 10, r));
  for (std::size_t i = 0; i <= r; ++i) CHECK(std::abs(fit.solution.monomial_coeffs[i] - exact.monomial_coeffs[i]) < 1e-8);
}

TEST_CASE("side selection") {
  // V collapses to one point, U is spread: clustering V is exact
  const DenseMatrix u = gaussian_matrix(10, 2, 1.0, 3);
  const DenseMatrix v(10, 2, 0.3);
  const CoresetFit fit = fit_coreset_coefficients(u, v, kExp, 10, 3, 2, 1);
  CHECK(fit.epsilon_v == 0.0);
  CHECK(fit.side == CoresetSide::V);
  // equal epsilons break toward U
  CHECK(fit_coreset_coefficients(v, v, kExp, 10, 3, 1, 1).side == CoresetSide::U);
}

TEST_CASE("weighted coreset moments match a dense weighted sum") {
  const DenseMatrix u = gaussian_matrix(15, 3, 0.6, 30), v = gaussian_matrix(11, 3, 0.6, 31);
  const std::size_t r = 3;
  const CoresetFit fit = coreset_moments(u, v, kExp, r, 4, 2);
  const DenseMatrix& side = fit.side == CoresetSide::U ? u : v;
  const DenseMatrix& other = fit.side == CoresetSide::U ? v : u;
  const Vector sizes = fit.assignment.cluster_sizes();
  DenseMatrix g(r + 1, r + 1, 0.0);
  Vector rhs(r + 1, 0.0);
  for (std::size_t c = 0; c < fit.assignment.k(); ++c)
    for (std::size_t j = 0; j < other.rows(); ++j) {
      double a = 0.0;
      for (std::size_t t = 0; t < 3; ++t) a += side(fit.assignment.center_indices[c], t) * other(j, t);
      for (std::size_t p = 0; p <= r; ++p) {
        rhs[p] += sizes[c] * std::pow(a, p) * std::exp(a);
        for (std::size_t q = 0; q <= r; ++q) g(p, q) += sizes[c] * std::pow(a, p + q);
      }
    }
  for (std::size_t p = 0; p <= r; ++p) {
    CHECK(std::abs(fit.moments.rhs[p] - rhs[p]) < 1e-9 * (1.0 + std::abs(rhs[p])));
    for (std::size_t q = 0; q <= r; ++q) CHECK(std::abs(fit.moments.gram(p, q) - g(p, q)) < 1e-9 * (1.0 + std::abs(g(p, q))));
  }
}

TEST_CASE("coefficient gap shrinks with more centers on clustered data") {
  int wins = 0;
  const std::size_t r = 6;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const DenseMatrix u = blobs(300, 5, 10, 0.05, derive_seed(500, s));
    const coeffs::CoeffSolution exact =
        coeffs::solve_ridge(coeffs::moments_full(u, u, kExp, r), coeffs::build_regularizer(u, u, 10, r));
    const double g5 = gap(coreset_coefficients(u, u, kExp, 10, r, 5, s).monomial_coeffs, exact.monomial_coeffs);
    const double g30 = gap(coreset_coefficients(u, u, kExp, 10, r, 30, s).monomial_coeffs, exact.monomial_coeffs);
    if (g30 < g5) ++wins;
  }
  CHECK(wins >= 8);
}
