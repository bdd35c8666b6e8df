#include <algorithm>
#include <cmath>

#include "pts/apps/apps.hpp"
#include "pts/coreset/coreset.hpp"
#include "pts/error.hpp"
#include "pts/numkit/random.hpp"

namespace pts::apps {

coeffs::CoeffSolution fit_exp_coefficients(const DenseMatrix& u, const DenseMatrix& v, double scale,
                                           const PolyOptions& opts) {
  if (!std::isfinite(scale)) throw InvalidArgument("fit_exp_coefficients: scale must be finite");
  const coeffs::ScalarFunction f = [scale](double x) { return std::exp(scale * x); };

  switch (opts.method) {
    case CoefficientMethod::Coreset: {
      const std::size_t k = std::min({opts.k_centers, u.rows(), v.rows()});
      return coreset::coreset_coefficients(u, v, f, opts.m, opts.r, k, derive_seed(opts.seed, 1), opts.basis);
    }
    case CoefficientMethod::Exact: {
      const coeffs::Regularizer w = coeffs::build_regularizer(u, v, opts.m, opts.r);
      const coeffs::MomentSystem ms = opts.basis == coeffs::Basis::Chebyshev
                                          ? coeffs::moments_chebyshev(u, v, f, opts.r, coeffs::chebyshev_interval(u, v))
                                          : coeffs::moments_full(u, v, f, opts.r);
      return coeffs::solve(ms, w);
    }
    case CoefficientMethod::Taylor: {
      coeffs::CoeffSolution sol;
      sol.monomial_coeffs = coeffs::taylor_exp_coefficients(scale, opts.r);
      sol.basis_coeffs = sol.monomial_coeffs;
      return sol;
    }
    case CoefficientMethod::ChebyshevSeries: {
      coeffs::CoeffSolution sol;
      sol.monomial_coeffs = coeffs::chebyshev_series_coefficients(f, coeffs::chebyshev_interval(u, v), opts.r);
      sol.basis_coeffs = sol.monomial_coeffs;
      return sol;
    }
  }
  throw InvalidArgument("fit_exp_coefficients: unknown method");
}

Vector RbfFactorization::apply(std::span<const double> x) const {
  if (x.size() != size()) throw DimensionMismatch("RbfFactorization::apply: length mismatch");
  Vector scaled(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = z_scale[i] * x[i];
  Vector y = op.apply(scaled);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= z_scale[i];
  return y;
}

double RbfFactorization::entry(std::size_t i, std::size_t j) const {
  return z_scale.at(i) * op.entry(i, j) * z_scale.at(j);
}

DenseMatrix RbfFactorization::materialize() const {
  DenseMatrix k = polyts::materialize(op);
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) k(i, j) *= z_scale[i] * z_scale[j];
  return k;
}

RbfFactorization rbf_factorize(const DenseMatrix& u, double gamma, std::size_t m, std::size_t r,
                               std::size_t k_centers, std::uint64_t seed) {
  PolyOptions opts;
  opts.m = m;
  opts.r = r;
  opts.k_centers = k_centers;
  opts.seed = seed;
  return rbf_factorize(u, gamma, opts);
}

RbfFactorization rbf_factorize(const DenseMatrix& u, double gamma, const PolyOptions& opts) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("rbf_factorize: gamma must be > 0");
  if (u.rows() == 0) throw InvalidArgument("rbf_factorize: empty input");

  coeffs::CoeffSolution sol = fit_exp_coefficients(u, u, 2.0 / gamma, opts);
  polyts::FactoredOperator op = polyts::poly_tensor_sketch(u, u, sol.monomial_coeffs, opts.m, derive_seed(opts.seed, 0));

  Vector z = row_squared_norms(u);
  for (double& zi : z) zi = std::exp(-zi / gamma);
  return RbfFactorization{std::move(z), std::move(op), gamma, std::move(sol)};
}

double rbf_entry(std::span<const double> x, std::span<const double> y, double gamma) {
  return std::exp(-squared_distance(x, y) / gamma);
}

DenseMatrix rbf_kernel(const DenseMatrix& x, const DenseMatrix& y, double gamma) {
  if (x.cols() != y.cols()) throw DimensionMismatch("rbf_kernel: column counts differ");
  if (!(gamma > 0.0)) throw InvalidArgument("rbf_kernel: gamma must be > 0");
  DenseMatrix k(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) k(i, j) = rbf_entry(x.row(i), y.row(j), gamma);
  return k;
}

}  // namespace pts::apps
