#include "pts/polyts/polyts.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "pts/error.hpp"
#include "pts/numkit/fft.hpp"
#include "pts/sketch/sketch.hpp"

namespace pts::polyts {

namespace {

constexpr double kMaterializeLimit = 1e8;

using cd = std::complex<double>;

// Degree 1..r TensorSketches of every row of `x`, built by the FFT recursion
// F <- FFT(C_j) * F, T_j <- IFFT(F). Row-at-a-time so F stays in cache.
std::vector<DenseMatrix> sketch_all_degrees(const DenseMatrix& x, const sketch::SketchFamilySet& fam,
                                            std::size_t r) {
  const std::size_t m = fam.dim_out();
  std::vector<DenseMatrix> out;
  out.reserve(r);
  for (std::size_t j = 0; j < r; ++j) out.emplace_back(x.rows(), m);
  if (r == 0) return out;

  FftPlan plan(m);
  std::vector<cd> acc(m), buf(m), scratch;
  Vector cs(m);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    fam[0].apply(row, out[0].row(i));
    if (r == 1) continue;
    auto first = out[0].row(i);
    for (std::size_t t = 0; t < m; ++t) acc[t] = first[t];
    plan.forward(acc, scratch);
    for (std::size_t j = 1; j < r; ++j) {
      fam[j].apply(row, cs);
      for (std::size_t t = 0; t < m; ++t) buf[t] = cs[t];
      plan.forward(buf, scratch);
      for (std::size_t t = 0; t < m; ++t) {
        acc[t] *= buf[t];
        buf[t] = acc[t];
      }
      plan.inverse(buf, scratch);
      auto dst = out[j].row(i);
      for (std::size_t t = 0; t < m; ++t) dst[t] = buf[t].real();
    }
  }
  return out;
}

}  // namespace

FactoredOperator::FactoredOperator(std::size_t rows, std::size_t cols, std::vector<Term> terms)
    : rows_(rows), cols_(cols), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.left.rows() != rows_ || t.right.rows() != cols_)
      throw DimensionMismatch("FactoredOperator: term row counts do not match operator shape");
    if (t.left.cols() != t.right.cols())
      throw DimensionMismatch("FactoredOperator: left/right widths differ");
  }
}

Vector FactoredOperator::apply(std::span<const double> x) const {
  if (x.size() != cols_) throw DimensionMismatch("FactoredOperator::apply: length mismatch");
  Vector y(rows_, 0.0);
  for (const auto& t : terms_) {
    if (t.coeff == 0.0) continue;
    Vector inner = matvec_transpose(t.right, x);
    for (double& v : inner) v *= t.coeff;
    for (std::size_t i = 0; i < rows_; ++i) y[i] += dot(t.left.row(i), inner);
  }
  return y;
}

Vector FactoredOperator::apply_transpose(std::span<const double> y) const {
  if (y.size() != rows_) throw DimensionMismatch("FactoredOperator::apply_transpose: length mismatch");
  Vector x(cols_, 0.0);
  for (const auto& t : terms_) {
    if (t.coeff == 0.0) continue;
    Vector inner = matvec_transpose(t.left, y);
    for (double& v : inner) v *= t.coeff;
    for (std::size_t j = 0; j < cols_; ++j) x[j] += dot(t.right.row(j), inner);
  }
  return x;
}

double FactoredOperator::entry(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw InvalidArgument("FactoredOperator::entry: index out of range");
  double s = 0.0;
  for (const auto& t : terms_) s += t.coeff * dot(t.left.row(i), t.right.row(j));
  return s;
}

FactoredOperator poly_tensor_sketch(const DenseMatrix& u, const DenseMatrix& v,
                                    std::span<const double> coeffs, std::size_t m, std::uint64_t seed) {
  if (u.cols() != v.cols()) throw DimensionMismatch("poly_tensor_sketch: U and V column counts differ");
  if (coeffs.empty()) throw InvalidArgument("poly_tensor_sketch: need at least one coefficient");
  if (m == 0) throw InvalidArgument("poly_tensor_sketch: sketch dimension must be >= 1");
  const std::size_t r = coeffs.size() - 1;

  const sketch::SketchFamilySet families(seed, u.cols(), m, r);
  auto su = sketch_all_degrees(u, families, r);
  auto sv = sketch_all_degrees(v, families, r);

  std::vector<FactoredOperator::Term> terms;
  terms.reserve(r + 1);
  terms.push_back({coeffs[0], DenseMatrix(u.rows(), 1, 1.0), DenseMatrix(v.rows(), 1, 1.0)});
  for (std::size_t j = 1; j <= r; ++j)
    terms.push_back({coeffs[j], std::move(su[j - 1]), std::move(sv[j - 1])});
  return FactoredOperator(u.rows(), v.rows(), std::move(terms));
}

Vector apply(const FactoredOperator& op, std::span<const double> x) { return op.apply(x); }

DenseMatrix materialize(const FactoredOperator& op) {
  if (static_cast<double>(op.rows()) * static_cast<double>(op.cols()) > kMaterializeLimit)
    throw InvalidArgument("materialize: operator exceeds 1e8 entries");
  DenseMatrix out(op.rows(), op.cols());
  for (const auto& t : op.terms()) {
    if (t.coeff == 0.0) continue;
    for (std::size_t i = 0; i < op.rows(); ++i) {
      auto li = t.left.row(i);
      auto oi = out.row(i);
      for (std::size_t j = 0; j < op.cols(); ++j) oi[j] += t.coeff * dot(li, t.right.row(j));
    }
  }
  return out;
}

double pts_error_bound(const DenseMatrix& u, const DenseMatrix& v, std::span<const double> coeffs,
                       std::size_t m, double poly_sup_err) {
  if (coeffs.empty()) return 0.0;
  const std::size_t r = coeffs.size() - 1;
  const double n1 = static_cast<double>(u.rows());
  const double n2 = static_cast<double>(v.rows());
  double bound = 2.0 * n1 * n2 * poly_sup_err * poly_sup_err;
  for (std::size_t j = 1; j <= r; ++j) {
    bound += 2.0 * static_cast<double>(r) * coeffs[j] * coeffs[j] *
             sketch::tensor_sketch_variance_bound(u, v, j, m);
  }
  return bound;
}

}  // namespace pts::polyts
