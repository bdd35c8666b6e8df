#include "pts/numkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "pts/error.hpp"

namespace pts {

namespace {

constexpr double kJitterStart = 1e-12;
constexpr int kJitterRetries = 3;
constexpr double kShiftedResidualTol = 1e-8;

void require_square_symmetric(const DenseMatrix& a, const char* who) {
  if (a.rows() != a.cols()) throw DimensionMismatch(std::string(who) + ": matrix is not square");
  if (!is_symmetric(a)) throw InvalidArgument(std::string(who) + ": matrix is not symmetric");
}

// Lower-triangular factor, or nullopt when a pivot is not strictly positive.
std::optional<DenseMatrix> cholesky(const DenseMatrix& a, double shift) {
  const std::size_t n = a.rows();
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) + shift;
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Vector cholesky_solve(const DenseMatrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
    y[i] /= l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) y[ii] -= l(k, ii) * y[k];
    y[ii] /= l(ii, ii);
  }
  return y;
}

Vector residual(const DenseMatrix& a, std::span<const double> x, std::span<const double> b) {
  Vector r = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

}  // namespace

bool is_symmetric(const DenseMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, max_abs(a));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol * scale) return false;
  return true;
}

Vector solve_spd(const DenseMatrix& a, std::span<const double> b) {
  require_square_symmetric(a, "solve_spd");
  const std::size_t n = a.rows();
  if (b.size() != n) throw DimensionMismatch("solve_spd: rhs length mismatch");
  if (n == 0) return {};

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
  const double base_shift = kJitterStart * std::abs(trace) / static_cast<double>(n);
  const double b_norm = norm2(b);

  for (int attempt = 0; attempt <= kJitterRetries; ++attempt) {
    const double shift = attempt == 0 ? 0.0 : base_shift * std::pow(10.0, attempt - 1);
    auto l = cholesky(a, shift);
    if (!l) continue;
    Vector x = cholesky_solve(*l, b);
    // one step of iterative refinement against the unshifted system
    Vector r = residual(a, x, b);
    Vector dx = cholesky_solve(*l, r);
    for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) continue;
    if (shift > 0.0 && norm2(residual(a, x, b)) > kShiftedResidualTol * b_norm) continue;
    return x;
  }
  throw SingularSystem("solve_spd: matrix is not positive definite after diagonal jitter");
}

SymmetricEigen symmetric_eigen(const DenseMatrix& a) {
  require_square_symmetric(a, "symmetric_eigen");
  const std::size_t n = a.rows();
  DenseMatrix m = a;
  DenseMatrix v = DenseMatrix::identity(n);
  // symmetrize exactly so rotations act on a truly symmetric matrix
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = 0.5 * (m(i, j) + m(j, i));

  double total = 0.0;
  for (double x : m.data()) total += x * x;
  const double stop = std::numeric_limits<double>::epsilon() * 1e-2 * std::sqrt(total);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (std::sqrt(off) <= stop) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return m(x, x) < m(y, y); });
  SymmetricEigen out{Vector(n), DenseMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = m(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

double min_eigenvalue_sym(const DenseMatrix& a) {
  if (a.rows() == 0) throw InvalidArgument("min_eigenvalue_sym: empty matrix");
  return symmetric_eigen(a).values.front();
}

double spd_condition_number(const DenseMatrix& a) {
  const auto eig = symmetric_eigen(a);
  const double lo = eig.values.front();
  const double hi = eig.values.back();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace pts
