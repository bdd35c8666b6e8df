#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pts/numkit/matrix.hpp"

namespace pts::polyts {

/// Gamma = sum_j coeff_j * left_j * right_j^T, kept in factored form.
///
/// For operators built by poly_tensor_sketch, term j holds the degree-j
/// TensorSketches of U and V: n x 1 ones columns for j = 0, n x m otherwise.
class FactoredOperator {
 public:
  struct Term {
    double coeff;
    DenseMatrix left;   // rows() x w
    DenseMatrix right;  // cols() x w
  };

  FactoredOperator(std::size_t rows, std::size_t cols, std::vector<Term> terms);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const Term> terms() const noexcept { return terms_; }

  /// Gamma * x, evaluated right to left; O((rows + cols) * sum of widths).
  Vector apply(std::span<const double> x) const;
  /// Gamma^T * y.
  Vector apply_transpose(std::span<const double> y) const;
  /// Single entry Gamma_ij.
  double entry(std::size_t i, std::size_t j) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Term> terms_;
};

/// Builds Gamma for U (n1 x d) and V (n2 x d) from monomial coefficients
/// c_0..c_r, applying one shared set of r hash families (seeded by `seed`) to
/// both sides. Sketches of degree j are obtained from degree j-1 by one
/// FFT-convolution step.
FactoredOperator poly_tensor_sketch(const DenseMatrix& u, const DenseMatrix& v,
                                    std::span<const double> coeffs, std::size_t m, std::uint64_t seed);

Vector apply(const FactoredOperator& op, std::span<const double> x);

/// Dense Gamma; refuses when rows * cols > 1e8.
DenseMatrix materialize(const FactoredOperator& op);

/// Expected squared Frobenius error bound of the polynomial sketch:
///   2 n1 n2 eps^2 + sum_{j>=1} 2 r c_j^2 (2 + 3^j) S_U(j) S_V(j) / m,
/// with S_U(j) = sum_i ||u_i||^{2j} and eps the sup-norm error of the
/// polynomial against f on an interval holding every entry of U V^T.
double pts_error_bound(const DenseMatrix& u, const DenseMatrix& v, std::span<const double> coeffs,
                       std::size_t m, double poly_sup_err);

}  // namespace pts::polyts
