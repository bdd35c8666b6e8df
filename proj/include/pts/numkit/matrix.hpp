#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pts {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles.
///
/// Values are checked for finiteness when a matrix is built from existing
/// data; element writes through operator() are unchecked.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  DenseMatrix transpose() const;
  bool all_finite() const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

/// A * x
Vector matvec(const DenseMatrix& a, std::span<const double> x);
/// A^T * x
Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x);
/// A * B^T without forming B^T.
DenseMatrix multiply_transposed(const DenseMatrix& a, const DenseMatrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> x);
double squared_distance(std::span<const double> a, std::span<const double> b);
double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);

/// Squared Euclidean norm of every row.
Vector row_squared_norms(const DenseMatrix& a);

/// Sum over rows of (squared row norm)^power, i.e. sum_i (sum_k A_ik^2)^power.
double row_norm_power_sum(const DenseMatrix& a, unsigned power);

/// New matrix holding rows[idx] for each idx.
DenseMatrix select_rows(const DenseMatrix& a, std::span<const std::size_t> idx);

/// Rows of `a` followed by rows of `b`.
DenseMatrix vstack(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace pts
