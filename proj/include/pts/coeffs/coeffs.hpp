#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pts/numkit/matrix.hpp"

namespace pts::coeffs {

using ScalarFunction = std::function<double(double)>;

enum class Basis { Monomial, Chebyshev };
enum class Solver { Exact, Coreset, Chebyshev, NonNegative };

/// Diagonal of the regularizer W. diag[0] = 0; diag[i] penalizes the
/// coefficient of degree i.
struct Regularizer {
  Vector diag;
  std::size_t degree() const noexcept { return diag.empty() ? 0 : diag.size() - 1; }
};

/// Sufficient statistics of a (weighted) polynomial regression over the
/// entries A_ij = <u_i, v_j>:
///   gram[p][q] = sum w_ij b_p(A_ij) b_q(A_ij)
///   rhs[p]     = sum w_ij f(A_ij) b_p(A_ij)
///   f_norm_sq  = sum w_ij f(A_ij)^2
/// where b_p is x^p (monomial) or t_p(x / a) (Chebyshev on [-a, a]).
struct MomentSystem {
  Basis basis = Basis::Monomial;
  double interval_a = 0.0;  // Chebyshev only
  DenseMatrix gram;
  Vector rhs;
  double f_norm_sq = 0.0;
  double n_effective = 0.0;  // total weight of regressed entries

  std::size_t degree() const noexcept { return rhs.empty() ? 0 : rhs.size() - 1; }
};

struct CoeffSolution {
  Vector monomial_coeffs;  // fed to poly_tensor_sketch
  Vector basis_coeffs;     // Chebyshev coefficients when basis is Chebyshev, else = monomial
  double objective_value = 0.0;  // ||Xc - f||^2 + ||Wc||^2
  Solver solver = Solver::Exact;
};

/// W_ii = sqrt(r (2 + 3^i) S_U(i) S_V(i) / m) for i = 1..r, W_00 = 0, with
/// S_U(i) = sum_j ||u_j||^{2i}.
Regularizer build_regularizer(const DenseMatrix& u, const DenseMatrix& v, std::size_t m, std::size_t r);

/// Monomial moments over every entry of U V^T, streamed row by row without
/// materializing the Vandermonde matrix. Throws NumericalRange if a power sum
/// overflows; the Chebyshev basis avoids that.
MomentSystem moments_full(const DenseMatrix& u, const DenseMatrix& v, const ScalarFunction& f, std::size_t r);

/// Chebyshev moments with t_j(A_ij / a). Entries outside [-a, a] throw
/// InvalidArgument.
MomentSystem moments_chebyshev(const DenseMatrix& u, const DenseMatrix& v, const ScalarFunction& f,
                               std::size_t r, double a);

/// Moments over the entries of L R^T where entry (i, j) carries weight
/// row_weights[i] * col_weights[j]; an empty span means unit weights.
/// Row partial sums are combined by pairwise reduction, so the result does
/// not depend on how rows are scheduled.
MomentSystem weighted_moments(const DenseMatrix& left, const DenseMatrix& right,
                              std::span<const double> row_weights, std::span<const double> col_weights,
                              const ScalarFunction& f, std::size_t r, Basis basis, double a = 0.0);

/// c* = (gram + W^2)^{-1} rhs for a monomial system.
CoeffSolution solve_ridge(const MomentSystem& ms, const Regularizer& w);

/// a = (max_i ||u_i||)(max_j ||v_j||), an upper bound on |<u_i, v_j>|.
double chebyshev_interval(const DenseMatrix& u, const DenseMatrix& v);

/// Column j holds the monomial coefficients (in x) of t_j(x / a).
DenseMatrix conversion_matrix(double a, std::size_t r);

/// c' = (gram + R^T W^2 R)^{-1} rhs for a Chebyshev system; monomial
/// coefficients are R c'.
CoeffSolution solve_ridge_chebyshev(const MomentSystem& ms, const Regularizer& w, const DenseMatrix& conversion);

/// Minimizes the same objective subject to c >= 0 (monomial systems only)
/// with a Lawson-Hanson style active-set iteration.
CoeffSolution solve_ridge_nonneg(const MomentSystem& ms, const Regularizer& w);

/// Dispatches on ms.basis to solve_ridge or solve_ridge_chebyshev.
CoeffSolution solve(const MomentSystem& ms, const Regularizer& w);

/// ||X c - f||^2 + ||W c||^2 from the moments. For a Chebyshev system `c`
/// holds Chebyshev coefficients and the penalty is ||W R c||^2.
double regression_objective(const MomentSystem& ms, const Regularizer& w, std::span<const double> c);

/// Condition number of the unregularized gram, and whether it passes
/// the monomial conditioning check (cond <= kMaxGramCondition).
inline constexpr double kMaxGramCondition = 1e12;
double gram_condition_number(const MomentSystem& ms);
bool gram_well_conditioned(const MomentSystem& ms);

/// C = max(5 ||U||_F^2 ||V||_F^2, (2 + 3^r) S_U(r) S_V(r)).
double bound_constant(const DenseMatrix& u, const DenseMatrix& v, std::size_t r);

/// 2 / (1 + m sigma^2 / (r C)): E||f(UV^T) - Gamma||_F^2 <= factor * ||f(UV^T)||_F^2
/// for the ridge-optimal coefficients. sigma is the smallest singular value
/// of the Vandermonde matrix, sqrt(max(0, lambda_min(gram))).
double multiplicative_bound(const DenseMatrix& u, const DenseMatrix& v, std::size_t m, std::size_t r,
                            double sigma_min);

/// Coreset variant: 2 / (1 + m sigma_bar^2 / (r C)) ||f_bar||^2 + 2 eps L sum_i ||v_i||.
double coreset_bound(double coreset_f_norm_sq, double sigma_bar, double c_const, std::size_t m, std::size_t r,
                     double epsilon, double lipschitz, double v_norm_sum);

/// sigma = sqrt(max(0, lambda_min(gram))).
double smallest_singular_value(const MomentSystem& ms);

/// Truncated Taylor coefficients of exp(scale * x): scale^j / j!.
Vector taylor_exp_coefficients(double scale, std::size_t r);

/// Chebyshev interpolant of f on [-a, a] at the r + 1 Chebyshev nodes,
/// returned as monomial coefficients.
Vector chebyshev_series_coefficients(const ScalarFunction& f, double a, std::size_t r);

/// Evaluates sum_j c_j x^j by Horner's rule.
double eval_monomial(std::span<const double> c, double x);

}  // namespace pts::coeffs
