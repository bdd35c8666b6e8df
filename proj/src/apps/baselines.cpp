#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pts/apps/apps.hpp"
#include "pts/error.hpp"
#include "pts/numkit/linalg.hpp"
#include "pts/numkit/random.hpp"

namespace pts::apps {

RffMap::RffMap(std::size_t dim_in, std::size_t dim_out, double gamma, std::uint64_t seed) {
  if (dim_in == 0 || dim_out == 0) throw InvalidArgument("RffMap: dimensions must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("RffMap: gamma must be > 0");
  freq_ = gaussian_matrix(dim_out, dim_in, std::sqrt(2.0 / gamma), derive_seed(seed, 0));
  phase_.resize(dim_out);
  SplitMix64 gen(derive_seed(seed, 1));
  for (double& b : phase_) b = 2.0 * std::numbers::pi * gen.uniform();
}

DenseMatrix RffMap::features(const DenseMatrix& u) const {
  if (u.cols() != freq_.cols()) throw DimensionMismatch("RffMap::features: input dimension mismatch");
  const std::size_t dim = phase_.size();
  const double scale = std::sqrt(2.0 / static_cast<double>(dim));
  DenseMatrix out(u.rows(), dim);
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t k = 0; k < dim; ++k) out(i, k) = scale * std::cos(dot(freq_.row(k), u.row(i)) + phase_[k]);
  return out;
}

DenseMatrix rff_features(const DenseMatrix& u, double gamma, std::size_t dim_out, std::uint64_t seed) {
  return RffMap(u.cols(), dim_out, gamma, seed).features(u);
}

std::size_t nystrom_default_size(std::size_t m, std::size_t r) {
  const double s = std::max(std::sqrt(static_cast<double>(r) * static_cast<double>(m)), static_cast<double>(r));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(s - 1e-12)));
}

namespace {

// Moore-Penrose inverse of a symmetric PSD matrix.
DenseMatrix psd_pinv(const DenseMatrix& a) {
  const SymmetricEigen eig = symmetric_eigen(a);
  const std::size_t n = a.rows();
  const double lmax = eig.values.empty() ? 0.0 : eig.values.back();
  DenseMatrix out(n, n);
  if (!(lmax > 0.0)) return out;
  const double cutoff = 1e-10 * lmax;
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = eig.values[k];
    if (lam <= cutoff) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += eig.vectors(i, k) * eig.vectors(j, k) / lam;
  }
  return out;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t s, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SplitMix64 gen(seed);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < s; ++i) std::swap(idx[i], idx[i + gen.below(n - i)]);
  idx.resize(s);
  return idx;
}

}  // namespace

NystromFactor nystrom_cross(const DenseMatrix& x, const DenseMatrix& y, double gamma, std::size_t s,
                            std::uint64_t seed) {
  if (x.cols() != y.cols()) throw DimensionMismatch("nystrom: column counts differ");
  const DenseMatrix pool = vstack(x, y);
  if (s == 0 || s > pool.rows()) throw InvalidArgument("nystrom: landmark count must be in [1, n]");

  NystromFactor out;
  out.landmarks = sample_without_replacement(pool.rows(), s, seed);
  const DenseMatrix centers = select_rows(pool, out.landmarks);
  out.left = rbf_kernel(x, centers, gamma);
  out.right = rbf_kernel(y, centers, gamma);
  out.pinv = psd_pinv(rbf_kernel(centers, centers, gamma));
  return out;
}

NystromFactor nystrom_approx(const DenseMatrix& u, double gamma, std::size_t s, std::uint64_t seed) {
  if (!(gamma > 0.0)) throw InvalidArgument("nystrom: gamma must be > 0");
  if (s == 0 || s > u.rows()) throw InvalidArgument("nystrom: landmark count must be in [1, n]");
  NystromFactor out;
  out.landmarks = sample_without_replacement(u.rows(), s, seed);
  const DenseMatrix centers = select_rows(u, out.landmarks);
  out.left = rbf_kernel(u, centers, gamma);
  out.right = out.left;
  out.pinv = psd_pinv(rbf_kernel(centers, centers, gamma));
  return out;
}

Vector NystromFactor::apply(std::span<const double> x) const {
  return matvec(left, matvec(pinv, matvec_transpose(right, x)));
}

Vector NystromFactor::apply_transpose(std::span<const double> y) const {
  return matvec(right, matvec(pinv, matvec_transpose(left, y)));
}

double NystromFactor::entry(std::size_t i, std::size_t j) const {
  const Vector t = matvec(pinv, right.row(j));
  return dot(left.row(i), t);
}

DenseMatrix NystromFactor::materialize() const {
  return multiply_transposed(left * pinv, right);
}

}  // namespace pts::apps
