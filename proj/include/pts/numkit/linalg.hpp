#pragma once

#include <span>

#include "pts/numkit/matrix.hpp"

namespace pts {

/// True when |A_ij - A_ji| <= tol * max(1, max|A|) for all i, j.
bool is_symmetric(const DenseMatrix& a, double tol = 1e-10);

/// Solves A x = b for symmetric positive definite A by Cholesky.
///
/// If the factorization breaks down, the diagonal is shifted by
/// 1e-12 * trace(A) / n and retried with the shift multiplied by 10, at most
/// three times. A shifted solution is accepted only if it still satisfies
/// ||A x - b|| <= 1e-8 ||b|| for the unshifted A.
///
/// Throws InvalidArgument for non-symmetric input and SingularSystem when no
/// attempt succeeds.
Vector solve_spd(const DenseMatrix& a, std::span<const double> b);

struct SymmetricEigen {
  Vector values;        // ascending
  DenseMatrix vectors;  // column j is the eigenvector for values[j]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const DenseMatrix& a);

/// Smallest eigenvalue of a symmetric matrix (Jacobi rotations).
/// Intended for the small (degree + 1)-square moment systems; n <= 64.
double min_eigenvalue_sym(const DenseMatrix& a);

/// lambda_max / lambda_min of a symmetric PSD matrix; +inf if lambda_min <= 0.
double spd_condition_number(const DenseMatrix& a);

}  // namespace pts
