#include "pts/coeffs/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pts/error.hpp"
#include "pts/numkit/linalg.hpp"

namespace pts::coeffs {

namespace {

constexpr std::size_t kRowBlock = 1024;
constexpr double kIntervalSlack = 1e-12;
constexpr double kKktTol = 1e-8;

// Accumulator layout: [basis sums t = 0..2r | rhs p = 0..r | f^2 | weight]
struct Partial {
  std::size_t r;
  Vector v;
  explicit Partial(std::size_t degree) : r(degree), v(3 * degree + 4, 0.0) {}
  double* sums() { return v.data(); }
  double* rhs() { return v.data() + 2 * r + 1; }
  double& fsq() { return v[3 * r + 2]; }
  double& weight() { return v[3 * r + 3]; }
  void add(const Partial& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  }
};

void require_monomial(const MomentSystem& ms, const char* who) {
  if (ms.basis != Basis::Monomial) throw InvalidArgument(std::string(who) + ": expects a monomial moment system");
}

void require_degree(const MomentSystem& ms, const Regularizer& w, const char* who) {
  if (w.diag.size() != ms.rhs.size())
    throw DimensionMismatch(std::string(who) + ": regularizer and moment system degrees differ");
}

Vector squared(const Vector& x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * x[i];
  return out;
}

double quad_form(const DenseMatrix& g, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t p = 0; p < c.size(); ++p)
    for (std::size_t q = 0; q < c.size(); ++q) s += c[p] * g(p, q) * c[q];
  return s;
}

// R^T diag(w2) R
DenseMatrix congruence(const DenseMatrix& r, const Vector& w2) {
  const std::size_t n = r.rows();
  DenseMatrix out(n, n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p; q < n; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += r(i, p) * w2[i] * r(i, q);
      out(p, q) = out(q, p) = s;
    }
  return out;
}

}  // namespace

Regularizer build_regularizer(const DenseMatrix& u, const DenseMatrix& v, std::size_t m, std::size_t r) {
  if (m == 0) throw InvalidArgument("build_regularizer: m must be >= 1");
  Regularizer w{Vector(r + 1, 0.0)};
  for (std::size_t i = 1; i <= r; ++i) {
    const auto k = static_cast<unsigned>(i);
    w.diag[i] = std::sqrt(static_cast<double>(r) * (2.0 + std::pow(3.0, k)) * row_norm_power_sum(u, k) *
                          row_norm_power_sum(v, k) / static_cast<double>(m));
  }
  return w;
}

MomentSystem weighted_moments(const DenseMatrix& left, const DenseMatrix& right,
                              std::span<const double> row_weights, std::span<const double> col_weights,
                              const ScalarFunction& f, std::size_t r, Basis basis, double a) {
  if (left.cols() != right.cols()) throw DimensionMismatch("moments: U and V column counts differ");
  if (!row_weights.empty() && row_weights.size() != left.rows())
    throw DimensionMismatch("moments: row weight count mismatch");
  if (!col_weights.empty() && col_weights.size() != right.rows())
    throw DimensionMismatch("moments: column weight count mismatch");
  if (basis == Basis::Chebyshev && !(a > 0.0)) throw InvalidArgument("moments: Chebyshev interval must be > 0");

  const std::size_t nt = 2 * r + 1;
  const std::size_t n_blocks = (left.rows() + kRowBlock - 1) / kRowBlock;
  std::vector<Partial> blocks(n_blocks, Partial(r));
  Vector b(nt);

  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    Partial& acc = blocks[blk];
    const std::size_t end = std::min(left.rows(), (blk + 1) * kRowBlock);
    for (std::size_t i = blk * kRowBlock; i < end; ++i) {
      const double wr = row_weights.empty() ? 1.0 : row_weights[i];
      if (wr == 0.0) continue;
      auto li = left.row(i);
      for (std::size_t j = 0; j < right.rows(); ++j) {
        const double w = wr * (col_weights.empty() ? 1.0 : col_weights[j]);
        if (w == 0.0) continue;
        const double x = dot(li, right.row(j));
        if (basis == Basis::Monomial) {
          b[0] = 1.0;
          for (std::size_t t = 1; t < nt; ++t) b[t] = b[t - 1] * x;
        } else {
          double y = x / a;
          if (std::abs(y) > 1.0 + kIntervalSlack)
            throw InvalidArgument("moments_chebyshev: entry " + std::to_string(x) + " outside [-a, a]");
          y = std::clamp(y, -1.0, 1.0);
          b[0] = 1.0;
          if (nt > 1) b[1] = y;
          for (std::size_t t = 2; t < nt; ++t) b[t] = 2.0 * y * b[t - 1] - b[t - 2];
        }
        const double fx = f(x);
        double* s = acc.sums();
        for (std::size_t t = 0; t < nt; ++t) s[t] += w * b[t];
        double* h = acc.rhs();
        for (std::size_t p = 0; p <= r; ++p) h[p] += w * fx * b[p];
        acc.fsq() += w * fx * fx;
        acc.weight() += w;
      }
    }
  }

  // pairwise reduction over blocks, fixed order
  for (std::size_t stride = 1; stride < n_blocks; stride *= 2)
    for (std::size_t i = 0; i + stride < n_blocks; i += 2 * stride) blocks[i].add(blocks[i + stride]);
  Partial total = n_blocks ? blocks[0] : Partial(r);

  for (double x : total.v) {
    if (!std::isfinite(x)) {
      throw NumericalRange(basis == Basis::Monomial
                               ? "moments: power sums overflowed; use the Chebyshev basis"
                               : "moments: function values overflowed");
    }
  }

  MomentSystem ms;
  ms.basis = basis;
  ms.interval_a = basis == Basis::Chebyshev ? a : 0.0;
  ms.gram = DenseMatrix(r + 1, r + 1);
  const double* s = total.sums();
  for (std::size_t p = 0; p <= r; ++p)
    for (std::size_t q = 0; q <= r; ++q) {
      if (basis == Basis::Monomial)
        ms.gram(p, q) = s[p + q];
      else  // t_p t_q = (t_{p+q} + t_{|p-q|}) / 2
        ms.gram(p, q) = 0.5 * (s[p + q] + s[p > q ? p - q : q - p]);
    }
  ms.rhs.assign(total.rhs(), total.rhs() + r + 1);
  ms.f_norm_sq = total.fsq();
  ms.n_effective = total.weight();
  return ms;
}

MomentSystem moments_full(const DenseMatrix& u, const DenseMatrix& v, const ScalarFunction& f, std::size_t r) {
  return weighted_moments(u, v, {}, {}, f, r, Basis::Monomial);
}

MomentSystem moments_chebyshev(const DenseMatrix& u, const DenseMatrix& v, const ScalarFunction& f,
                               std::size_t r, double a) {
  return weighted_moments(u, v, {}, {}, f, r, Basis::Chebyshev, a);
}

double regression_objective(const MomentSystem& ms, const Regularizer& w, std::span<const double> c) {
  require_degree(ms, w, "regression_objective");
  if (c.size() != ms.rhs.size()) throw DimensionMismatch("regression_objective: coefficient length mismatch");
  const double fit = ms.f_norm_sq - 2.0 * dot(c, ms.rhs) + quad_form(ms.gram, c);
  double penalty = 0.0;
  if (ms.basis == Basis::Monomial) {
    for (std::size_t i = 0; i < c.size(); ++i) penalty += w.diag[i] * w.diag[i] * c[i] * c[i];
  } else {
    const Vector mono = matvec(conversion_matrix(ms.interval_a, ms.degree()), c);
    for (std::size_t i = 0; i < mono.size(); ++i) penalty += w.diag[i] * w.diag[i] * mono[i] * mono[i];
  }
  return std::max(0.0, fit + penalty);
}

CoeffSolution solve_ridge(const MomentSystem& ms, const Regularizer& w) {
  require_monomial(ms, "solve_ridge");
  require_degree(ms, w, "solve_ridge");
  DenseMatrix h = ms.gram;
  for (std::size_t i = 0; i < w.diag.size(); ++i) h(i, i) += w.diag[i] * w.diag[i];
  CoeffSolution sol;
  sol.monomial_coeffs = solve_spd(h, ms.rhs);
  sol.basis_coeffs = sol.monomial_coeffs;
  sol.objective_value = regression_objective(ms, w, sol.monomial_coeffs);
  sol.solver = Solver::Exact;
  return sol;
}

double chebyshev_interval(const DenseMatrix& u, const DenseMatrix& v) {
  auto max_norm = [](const DenseMatrix& x) {
    double best = 0.0;
    for (double sq : row_squared_norms(x)) best = std::max(best, sq);
    return std::sqrt(best);
  };
  const double a = max_norm(u) * max_norm(v);
  if (!(a > 0.0)) throw DegenerateInput("chebyshev_interval: all-zero input gives an empty interval");
  return a;
}

DenseMatrix conversion_matrix(double a, std::size_t r) {
  if (!(a > 0.0)) throw InvalidArgument("conversion_matrix: a must be > 0");
  DenseMatrix out(r + 1, r + 1);
  out(0, 0) = 1.0;
  if (r >= 1) out(1, 1) = 1.0 / a;
  // t_{j+1}(x/a) = (2/a) x t_j(x/a) - t_{j-1}(x/a)
  for (std::size_t j = 1; j < r; ++j)
    for (std::size_t i = 0; i <= r; ++i) {
      const double shifted = i > 0 ? out(i - 1, j) : 0.0;
      out(i, j + 1) = 2.0 / a * shifted - out(i, j - 1);
    }
  return out;
}

CoeffSolution solve_ridge_chebyshev(const MomentSystem& ms, const Regularizer& w, const DenseMatrix& conversion) {
  if (ms.basis != Basis::Chebyshev) throw InvalidArgument("solve_ridge_chebyshev: expects a Chebyshev system");
  require_degree(ms, w, "solve_ridge_chebyshev");
  if (conversion.rows() != ms.rhs.size() || conversion.cols() != ms.rhs.size())
    throw DimensionMismatch("solve_ridge_chebyshev: conversion matrix size mismatch");

  const DenseMatrix h = ms.gram + congruence(conversion, squared(w.diag));
  CoeffSolution sol;
  sol.basis_coeffs = solve_spd(h, ms.rhs);
  sol.monomial_coeffs = matvec(conversion, sol.basis_coeffs);
  sol.objective_value = regression_objective(ms, w, sol.basis_coeffs);
  sol.solver = Solver::Chebyshev;
  return sol;
}

CoeffSolution solve(const MomentSystem& ms, const Regularizer& w) {
  if (ms.basis == Basis::Chebyshev)
    return solve_ridge_chebyshev(ms, w, conversion_matrix(ms.interval_a, ms.degree()));
  return solve_ridge(ms, w);
}

CoeffSolution solve_ridge_nonneg(const MomentSystem& ms, const Regularizer& w) {
  require_monomial(ms, "solve_ridge_nonneg");
  require_degree(ms, w, "solve_ridge_nonneg");
  const std::size_t n = ms.rhs.size();
  DenseMatrix h = ms.gram;
  for (std::size_t i = 0; i < n; ++i) h(i, i) += w.diag[i] * w.diag[i];
  const Vector& b = ms.rhs;

  // minimize c^T H c - 2 b^T c subject to c >= 0
  double b_scale = 0.0;
  for (double x : b) b_scale = std::max(b_scale, std::abs(x));
  const double h_scale = max_abs(h);

  Vector c(n, 0.0);
  std::vector<bool> passive(n, false);
  auto gradient = [&] {
    Vector g = matvec(h, c);
    for (std::size_t i = 0; i < n; ++i) g[i] = b[i] - g[i];
    return g;
  };
  auto kkt_tol = [&] {
    double c_scale = 0.0;
    for (double x : c) c_scale = std::max(c_scale, std::abs(x));
    return kKktTol * std::max(b_scale + h_scale * c_scale, std::numeric_limits<double>::min());
  };
  auto solve_passive = [&] {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (passive[i]) idx.push_back(i);
    DenseMatrix hp(idx.size(), idx.size());
    Vector bp(idx.size());
    for (std::size_t p = 0; p < idx.size(); ++p) {
      bp[p] = b[idx[p]];
      for (std::size_t q = 0; q < idx.size(); ++q) hp(p, q) = h(idx[p], idx[q]);
    }
    const Vector zp = solve_spd(hp, bp);
    Vector z(n, 0.0);
    for (std::size_t p = 0; p < idx.size(); ++p) z[idx[p]] = zp[p];
    return z;
  };

  const std::size_t max_pivots = 10 * n;
  std::size_t pivots = 0;
  while (true) {
    const Vector g = gradient();
    std::size_t enter = n;
    double best = kkt_tol();
    for (std::size_t i = 0; i < n; ++i)
      if (!passive[i] && g[i] > best) {
        best = g[i];
        enter = i;
      }
    if (enter == n) break;
    if (++pivots > max_pivots) throw ConvergenceFailure("solve_ridge_nonneg: pivot limit exceeded");
    passive[enter] = true;

    while (true) {
      const Vector z = solve_passive();
      bool feasible = true;
      double alpha = 1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (passive[i] && z[i] <= 0.0) {
          feasible = false;
          const double denom = c[i] - z[i];
          alpha = std::min(alpha, denom > 0.0 ? c[i] / denom : 0.0);
        }
      if (feasible) {
        c = z;
        break;
      }
      if (++pivots > max_pivots) throw ConvergenceFailure("solve_ridge_nonneg: pivot limit exceeded");
      for (std::size_t i = 0; i < n; ++i) {
        if (!passive[i]) continue;
        c[i] += alpha * (z[i] - c[i]);
        if (c[i] <= 0.0) {
          c[i] = 0.0;
          passive[i] = false;
        }
      }
    }
  }

  const Vector g = gradient();
  double viol = 0.0;
  for (std::size_t i = 0; i < n; ++i) viol = std::max(viol, passive[i] ? std::abs(g[i]) : std::max(g[i], 0.0));
  if (viol > kkt_tol()) throw ConvergenceFailure("solve_ridge_nonneg: KKT residual above tolerance");

  CoeffSolution sol;
  sol.monomial_coeffs = c;
  sol.basis_coeffs = c;
  sol.objective_value = regression_objective(ms, w, c);
  sol.solver = Solver::NonNegative;
  return sol;
}

double gram_condition_number(const MomentSystem& ms) { return spd_condition_number(ms.gram); }

bool gram_well_conditioned(const MomentSystem& ms) { return gram_condition_number(ms) <= kMaxGramCondition; }

double smallest_singular_value(const MomentSystem& ms) {
  return std::sqrt(std::max(0.0, min_eigenvalue_sym(ms.gram)));
}

double bound_constant(const DenseMatrix& u, const DenseMatrix& v, std::size_t r) {
  const double frob = 5.0 * row_norm_power_sum(u, 1) * row_norm_power_sum(v, 1);
  const auto k = static_cast<unsigned>(r);
  const double top = (2.0 + std::pow(3.0, k)) * row_norm_power_sum(u, k) * row_norm_power_sum(v, k);
  return std::max(frob, top);
}

double multiplicative_bound(const DenseMatrix& u, const DenseMatrix& v, std::size_t m, std::size_t r,
                            double sigma_min) {
  if (r == 0) return 2.0;
  const double c = bound_constant(u, v, r);
  if (!(c > 0.0)) return 2.0;
  return 2.0 / (1.0 + static_cast<double>(m) * sigma_min * sigma_min / (static_cast<double>(r) * c));
}

double coreset_bound(double coreset_f_norm_sq, double sigma_bar, double c_const, std::size_t m, std::size_t r,
                     double epsilon, double lipschitz, double v_norm_sum) {
  double factor = 2.0;
  if (r > 0 && c_const > 0.0)
    factor = 2.0 / (1.0 + static_cast<double>(m) * sigma_bar * sigma_bar / (static_cast<double>(r) * c_const));
  return factor * coreset_f_norm_sq + 2.0 * epsilon * lipschitz * v_norm_sum;
}

Vector taylor_exp_coefficients(double scale, std::size_t r) {
  Vector c(r + 1);
  c[0] = 1.0;
  for (std::size_t j = 1; j <= r; ++j) c[j] = c[j - 1] * scale / static_cast<double>(j);
  return c;
}

Vector chebyshev_series_coefficients(const ScalarFunction& f, double a, std::size_t r) {
  if (!(a > 0.0)) throw InvalidArgument("chebyshev_series_coefficients: a must be > 0");
  const std::size_t n = r + 1;
  Vector fx(n), theta(n);
  for (std::size_t k = 0; k < n; ++k) {
    theta[k] = std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    fx[k] = f(a * std::cos(theta[k]));
  }
  Vector cheb(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += fx[k] * std::cos(static_cast<double>(j) * theta[k]);
    cheb[j] = 2.0 * s / static_cast<double>(n);
  }
  cheb[0] *= 0.5;
  return matvec(conversion_matrix(a, r), cheb);
}

double eval_monomial(std::span<const double> c, double x) {
  double acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * x + c[j];
  return acc;
}

}  // namespace pts::coeffs
