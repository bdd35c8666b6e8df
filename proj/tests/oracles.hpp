#pragma once

// Independent reference implementations used only by the tests. None of
// these share code paths with the library: convolutions are direct sums,
// least squares goes through an explicit Vandermonde matrix and Householder
// QR, eigenvalues come from bracketing roots of det(A - t I).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pts/numkit/matrix.hpp"

namespace oracle {

using pts::DenseMatrix;
using Vec = std::vector<double>;

inline Vec circular_convolve(const Vec& x, const Vec& y) {
  const std::size_t m = x.size();
  Vec z(m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) z[(a + b) % m] += x[a] * y[b];
  return z;
}

inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      s += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = s;
  }
  return out;
}

inline Vec entries(const DenseMatrix& u, const DenseMatrix& v) {
  Vec a;
  a.reserve(u.rows() * v.rows());
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t j = 0; j < v.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < u.cols(); ++k) s += u(i, k) * v(j, k);
      a.push_back(s);
    }
  return a;
}

inline double cheb_t(std::size_t j, double y) {
  y = std::clamp(y, -1.0, 1.0);
  return std::cos(static_cast<double>(j) * std::acos(y));
}

/// Explicit design matrix with X[e][p] = basis(p, a_e).
inline DenseMatrix design(const Vec& a, std::size_t r, const std::function<double(std::size_t, double)>& basis) {
  DenseMatrix x(a.size(), r + 1);
  for (std::size_t e = 0; e < a.size(); ++e)
    for (std::size_t p = 0; p <= r; ++p) x(e, p) = basis(p, a[e]);
  return x;
}

inline DenseMatrix vandermonde(const Vec& a, std::size_t r) {
  return design(a, r, [](std::size_t p, double t) { return std::pow(t, static_cast<double>(p)); });
}

inline DenseMatrix gram(const DenseMatrix& x) {
  DenseMatrix g(x.cols(), x.cols());
  for (std::size_t p = 0; p < x.cols(); ++p)
    for (std::size_t q = 0; q < x.cols(); ++q) {
      double s = 0.0;
      for (std::size_t e = 0; e < x.rows(); ++e) s += x(e, p) * x(e, q);
      g(p, q) = s;
    }
  return g;
}

/// argmin ||X c - f||^2 + ||diag(w) c||^2 by Householder QR on [X; diag(w)].
inline Vec ridge_lstsq(const DenseMatrix& x, const Vec& f, const Vec& w) {
  const std::size_t n = x.rows() + x.cols();
  const std::size_t p = x.cols();
  std::vector<Vec> a(n, Vec(p, 0.0));
  Vec b(n, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < p; ++j) a[i][j] = x(i, j);
    b[i] = f[i];
  }
  for (std::size_t j = 0; j < p; ++j) a[x.rows() + j][j] = w.empty() ? 0.0 : w[j];

  for (std::size_t k = 0; k < p; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += a[i][k] * a[i][k];
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::runtime_error("ridge_lstsq: rank deficient");
    const double alpha = a[k][k] > 0 ? -norm : norm;
    Vec v(n, 0.0);
    for (std::size_t i = k; i < n; ++i) v[i] = a[i][k];
    v[k] -= alpha;
    double vv = 0.0;
    for (std::size_t i = k; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    for (std::size_t j = k; j < p; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += v[i] * a[i][j];
      s = 2.0 * s / vv;
      for (std::size_t i = k; i < n; ++i) a[i][j] -= s * v[i];
    }
    double s = 0.0;
    for (std::size_t i = k; i < n; ++i) s += v[i] * b[i];
    s = 2.0 * s / vv;
    for (std::size_t i = k; i < n; ++i) b[i] -= s * v[i];
  }
  Vec c(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < p; ++j) s -= a[k][j] * c[j];
    c[k] = s / a[k][k];
  }
  return c;
}

/// ||X c - f||^2 + ||diag(w) c||^2 evaluated entry by entry.
inline double ridge_objective(const DenseMatrix& x, const Vec& f, const Vec& w, const Vec& c) {
  double s = 0.0;
  for (std::size_t e = 0; e < x.rows(); ++e) {
    double pred = 0.0;
    for (std::size_t p = 0; p < x.cols(); ++p) pred += x(e, p) * c[p];
    s += (pred - f[e]) * (pred - f[e]);
  }
  for (std::size_t p = 0; p < c.size() && p < w.size(); ++p) s += w[p] * w[p] * c[p] * c[p];
  return s;
}

/// det(A) by Gaussian elimination with partial pivoting.
inline double determinant(std::vector<Vec> a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    if (a[piv][k] == 0.0) return 0.0;
    if (piv != k) {
      std::swap(a[piv], a[k]);
      det = -det;
    }
    det *= a[k][k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  return det;
}

/// Eigenvalues of a small symmetric matrix with distinct spectrum: scan
/// det(A - t I) for sign changes on a fine grid over the Gershgorin range,
/// then bisect each bracket.
inline Vec eigenvalues_by_bracketing(const DenseMatrix& a, std::size_t grid = 200000) {
  const std::size_t n = a.rows();
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double rad = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) rad += std::abs(a(i, j));
    lo = std::min(lo, a(i, i) - rad);
    hi = std::max(hi, a(i, i) + rad);
  }
  lo -= 1e-6;
  hi += 1e-6;
  auto charp = [&](double t) {
    std::vector<Vec> m(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = a(i, j) - (i == j ? t : 0.0);
    return determinant(std::move(m));
  };
  Vec roots;
  double prev_t = lo, prev_v = charp(lo);
  for (std::size_t g = 1; g <= grid; ++g) {
    const double t = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid);
    const double v = charp(t);
    if (v == 0.0) {
      roots.push_back(t);
    } else if ((v > 0) != (prev_v > 0) && prev_v != 0.0) {
      double l = prev_t, h = t, vl = prev_v;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (l + h);
        const double vm = charp(mid);
        if ((vm > 0) == (vl > 0)) {
          l = mid;
          vl = vm;
        } else {
          h = mid;
        }
      }
      roots.push_back(0.5 * (l + h));
    }
    prev_t = t;
    prev_v = v;
  }
  return roots;
}

/// Dense element-wise f(U V^T).
inline DenseMatrix apply_elementwise(const DenseMatrix& u, const DenseMatrix& v, const std::function<double(double)>& f) {
  DenseMatrix k(u.rows(), v.rows());
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t j = 0; j < v.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < u.cols(); ++c) s += u(i, c) * v(j, c);
      k(i, j) = f(s);
    }
  return k;
}

/// exp(-||x_i - y_j||^2 / gamma) entry by entry.
inline DenseMatrix rbf(const DenseMatrix& x, const DenseMatrix& y, double gamma) {
  DenseMatrix k(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) s += (x(i, c) - y(j, c)) * (x(i, c) - y(j, c));
      k(i, j) = std::exp(-s / gamma);
    }
  return k;
}

inline double frob_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  return std::sqrt(s);
}

inline double frob(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

/// Running mean and standard error.
struct MeanSe {
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double se() const {
    const double m = mean();
    const double var = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  }
};

}  // namespace oracle
