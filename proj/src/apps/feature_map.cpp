#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pts/apps/apps.hpp"
#include "pts/coreset/coreset.hpp"
#include "pts/error.hpp"
#include "pts/numkit/random.hpp"
#include "pts/sketch/sketch.hpp"

namespace pts::apps {

DenseMatrix sketch_features(const DenseMatrix& u, std::span<const double> coeffs, std::size_t m,
                            std::uint64_t seed) {
  if (coeffs.empty()) throw InvalidArgument("sketch_features: need at least c_0");
  if (m == 0) throw InvalidArgument("sketch_features: m must be >= 1");
  for (double c : coeffs)
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("sketch_features: coefficients must be >= 0");

  const std::size_t n = u.rows();
  const std::size_t r = coeffs.size() - 1;
  DenseMatrix out(n, 1 + r * m);
  const double s0 = std::sqrt(coeffs[0]);
  for (std::size_t i = 0; i < n; ++i) out(i, 0) = s0;
  if (r == 0) return out;

  const sketch::SketchFamilySet families(seed, u.cols(), m, r);
  DenseMatrix t(n, 1, 1.0);
  for (std::size_t j = 1; j <= r; ++j) {
    t = sketch::tensor_sketch_step(t, u, families[j - 1]);
    const double s = std::sqrt(coeffs[j]);
    const std::size_t off = 1 + (j - 1) * m;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < m; ++c) out(i, off + c) = s * t(i, c);
  }
  return out;
}

FeatureMap feature_map(const DenseMatrix& u, const coeffs::ScalarFunction& f, std::size_t m, std::size_t r,
                       std::size_t k_centers, std::uint64_t seed) {
  if (u.rows() == 0) throw InvalidArgument("feature_map: empty input");
  const std::size_t k = std::min(k_centers, u.rows());
  const coreset::CoresetFit fit = coreset::coreset_moments(u, u, f, r, k, derive_seed(seed, 1));
  const coeffs::Regularizer w = coeffs::build_regularizer(u, u, m, r);

  FeatureMap out;
  out.coefficients = coeffs::solve_ridge_nonneg(fit.moments, w);
  for (double c : out.coefficients.monomial_coeffs)
    if (c < 0.0) throw std::logic_error("feature_map: non-negative solver returned a negative coefficient");
  out.features = sketch_features(u, out.coefficients.monomial_coeffs, m, derive_seed(seed, 0));
  return out;
}

}  // namespace pts::apps
