#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pts/coeffs/coeffs.hpp"
#include "pts/error.hpp"
#include "pts/numkit/random.hpp"
#include "pts/polyts/polyts.hpp"

using namespace pts;
using namespace pts::polyts;

namespace {

DenseMatrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  return gaussian_matrix(n, d, 1.0 / std::sqrt(static_cast<double>(d)), seed);
}

}  // namespace

TEST_CASE("constant term gives the all-ones matrix") {
  const DenseMatrix u = gaussian(6, 3, 1), v = gaussian(4, 3, 2);
  const FactoredOperator op = poly_tensor_sketch(u, v, Vector{1, 0, 0}, 5, 7);
  CHECK(op.rows() == 6);
  CHECK(op.cols() == 4);
  REQUIRE(op.terms().size() == 3);
  CHECK(op.terms()[0].left.cols() == 1);
  CHECK(op.terms()[1].left.cols() == 5);
  const DenseMatrix g = materialize(op);
  for (double x : g.data()) CHECK(x == doctest::Approx(1.0));
}

TEST_CASE("linear term is unbiased for U V^T") {
  const DenseMatrix u = gaussian(3, 4, 3), v = gaussian(3, 4, 4);
  const DenseMatrix truth = u * v.transpose();
  std::vector<oracle::MeanSe> est(9);
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const DenseMatrix g = materialize(poly_tensor_sketch(u, v, Vector{0, 1}, 3, derive_seed(5, s)));
    for (std::size_t i = 0; i < 9; ++i) est[i].add(g.data()[i]);
  }
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(est[i].mean() - truth.data()[i]) <= 3.0 * est[i].se());
}

TEST_CASE("mean of Gamma converges to the polynomial of U V^T") {
  const DenseMatrix u = gaussian(50, 5, 8), v = gaussian(50, 5, 9);
  const Vector c{0.5, 1.0, -0.7, 0.3};
  const std::size_t i = 3, j = 17;
  double a = 0.0;
  for (std::size_t k = 0; k < 5; ++k) a += u(i, k) * v(j, k);
  const double truth = coeffs::eval_monomial(c, a);
  oracle::MeanSe est;
  for (std::uint64_t s = 0; s < 2000; ++s) est.add(poly_tensor_sketch(u, v, c, 8, derive_seed(10, s)).entry(i, j));
  CHECK(std::abs(est.mean() - truth) <= 3.0 * est.se());
}

TEST_CASE("exp with Taylor coefficients at m = 200") {
  const DenseMatrix u = gaussian(100, 10, 11), v = gaussian(100, 10, 12);
  const Vector c = coeffs::taylor_exp_coefficients(1.0, 8);
  const DenseMatrix exact = oracle::apply_elementwise(u, v, [](double t) { return std::exp(t); });
  // squared relative error ||Gamma - K||^2 / ||K||^2
  const DenseMatrix g = materialize(poly_tensor_sketch(u, v, c, 200, 13));
  const double rel = oracle::frob_diff(g, exact) / oracle::frob(exact);
  CHECK(rel * rel < 0.05);
  // the unsquared ratio falls like 1/sqrt(m)
  const DenseMatrix big = materialize(poly_tensor_sketch(u, v, c, 3200, 13));
  CHECK(oracle::frob_diff(big, exact) / oracle::frob(exact) < 0.05);
}

TEST_CASE("apply against the dense operator") {
  const DenseMatrix u = gaussian(40, 6, 14), v = gaussian(30, 6, 15);
  const FactoredOperator op = poly_tensor_sketch(u, v, Vector{0.2, 1.0, 0.5, 0.1}, 7, 16);
  const DenseMatrix g = materialize(op);

  const Vector zero = polyts::apply(op, Vector(30, 0.0));
  for (double z : zero) CHECK(z == 0.0);

  for (std::size_t i = 0; i < 30; i += 7) {
    Vector e(30, 0.0);
    e[i] = 1.0;
    const Vector col = polyts::apply(op, e);
    for (std::size_t r = 0; r < 40; ++r) CHECK(std::abs(col[r] - g(r, i)) < 1e-10);
  }

  SplitMix64 gen(3);
  Vector x(30), y(30);
  for (double& t : x) t = gen.uniform() - 0.5;
  for (double& t : y) t = gen.uniform() - 0.5;
  const Vector gx = polyts::apply(op, x);
  const Vector dense = matvec(g, x);
  for (std::size_t r = 0; r < 40; ++r) CHECK(std::abs(gx[r] - dense[r]) < 1e-9);

  Vector comb(30);
  for (std::size_t k = 0; k < 30; ++k) comb[k] = 2.0 * x[k] - 0.5 * y[k];
  const Vector gc = polyts::apply(op, comb), gy = polyts::apply(op, y);
  for (std::size_t r = 0; r < 40; ++r) CHECK(std::abs(gc[r] - (2.0 * gx[r] - 0.5 * gy[r])) < 1e-10);

  Vector w(40);
  for (double& t : w) t = gen.uniform() - 0.5;
  const Vector gtw = op.apply_transpose(w);
  const Vector dense_t = matvec_transpose(g, w);
  for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(gtw[k] - dense_t[k]) < 1e-9);

  for (std::size_t r = 0; r < 40; r += 9)
    for (std::size_t k = 0; k < 30; k += 7) CHECK(std::abs(op.entry(r, k) - g(r, k)) < 1e-10);

  CHECK_THROWS_AS(polyts::apply(op, Vector(29, 0.0)), DimensionMismatch);
}

TEST_CASE("materialize is linear in the terms") {
  const DenseMatrix u = gaussian(10, 3, 20), v = gaussian(8, 3, 21);
  const FactoredOperator a = poly_tensor_sketch(u, v, Vector{1.0, 0.5}, 4, 22);
  const FactoredOperator b = poly_tensor_sketch(u, v, Vector{0.0, 0.0, 2.0}, 4, 23);
  std::vector<FactoredOperator::Term> terms(a.terms().begin(), a.terms().end());
  terms.insert(terms.end(), b.terms().begin(), b.terms().end());
  const FactoredOperator sum(10, 8, terms);
  const DenseMatrix expect = materialize(a) + materialize(b);
  CHECK(oracle::frob_diff(materialize(sum), expect) < 1e-10);

  const FactoredOperator ones(3, 3, {{1.0, DenseMatrix(3, 1, 1.0), DenseMatrix(3, 1, 1.0)}});
  const DenseMatrix all = materialize(ones);
  for (double x : all.data()) CHECK(x == 1.0);
}

TEST_CASE("input validation") {
  const DenseMatrix u = gaussian(4, 3, 1), v = gaussian(4, 2, 2);
  CHECK_THROWS_AS(poly_tensor_sketch(u, v, Vector{1, 1}, 4, 0), DimensionMismatch);
  CHECK_THROWS_AS(poly_tensor_sketch(u, u, Vector{}, 4, 0), InvalidArgument);
  CHECK_THROWS_AS(poly_tensor_sketch(u, u, Vector{1, 1}, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(FactoredOperator(3, 3, {{1.0, DenseMatrix(3, 2), DenseMatrix(3, 1)}}), DimensionMismatch);
  const FactoredOperator big(20000, 20000, {{1.0, DenseMatrix(20000, 1, 1.0), DenseMatrix(20000, 1, 1.0)}});
  CHECK_THROWS_AS(materialize(big), InvalidArgument);
}

TEST_CASE("rectangular and seed-reproducible") {
  const DenseMatrix u = gaussian(7, 3, 30), v = gaussian(11, 3, 31);
  const DenseMatrix a = materialize(poly_tensor_sketch(u, v, Vector{0, 1, 1}, 6, 32));
  const DenseMatrix b = materialize(poly_tensor_sketch(u, v, Vector{0, 1, 1}, 6, 32));
  CHECK(a.rows() == 7);
  CHECK(a.cols() == 11);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("error bound formula") {
  const DenseMatrix one{{1.0}};
  CHECK(pts_error_bound(one, one, Vector{0, 1}, 1, 0.0) == doctest::Approx(10.0));
  CHECK(pts_error_bound(one, one, Vector{0, 0, 0}, 3, 0.0) == 0.0);
  // sup-norm term: 2 n1 n2 eps^2
  CHECK(pts_error_bound(DenseMatrix(3, 1, 0.0), DenseMatrix(2, 1, 0.0), Vector{1}, 1, 0.5) == doctest::Approx(3.0));
}

TEST_CASE("error bound dominates the empirical error") {
  const DenseMatrix u = gaussian(50, 5, 40), v = gaussian(50, 5, 41);
  const std::size_t r = 4, m = 16;
  const Vector c = coeffs::taylor_exp_coefficients(1.0, r);
  const DenseMatrix exact = oracle::apply_elementwise(u, v, [](double t) { return std::exp(t); });
  double eps = 0.0;
  for (double a : oracle::entries(u, v)) eps = std::max(eps, std::abs(std::exp(a) - coeffs::eval_monomial(c, a)));
  const double bound = pts_error_bound(u, v, c, m, eps);
  double mse = 0.0;
  const int trials = 500;
  for (int s = 0; s < trials; ++s) {
    const double e = oracle::frob_diff(materialize(poly_tensor_sketch(u, v, c, m, derive_seed(42, s))), exact);
    mse += e * e / trials;
  }
  CHECK(mse <= 1.1 * bound);
}
