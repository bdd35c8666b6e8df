#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pts/numkit/matrix.hpp"

namespace pts::sketch {

/// One CountSketch: a hash [d] -> [m] and a sign [d] -> {-1, +1}, stored as
/// explicit tables of independent uniform draws.
class HashFamily {
 public:
  /// Draws the tables from a SplitMix64 stream seeded with `seed`. Entry i
  /// takes two consecutive outputs: the bucket is below(m) of the first, the
  /// sign is the top bit of the second (set -> -1).
  HashFamily(std::uint64_t seed, std::size_t dim_in, std::size_t dim_out);

  /// Explicit tables (tests, fixtures). Seed is recorded as 0.
  HashFamily(std::vector<std::size_t> hash, std::vector<int> sign, std::size_t dim_out);

  std::size_t dim_in() const noexcept { return hash_.size(); }
  std::size_t dim_out() const noexcept { return dim_out_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const std::size_t> hash() const noexcept { return hash_; }
  std::span<const double> sign() const noexcept { return sign_; }

  /// CountSketch of one vector into `out` (length dim_out, overwritten).
  void apply(std::span<const double> u, std::span<double> out) const;

  friend bool operator==(const HashFamily&, const HashFamily&) = default;

 private:
  std::size_t dim_out_;
  std::uint64_t seed_;
  std::vector<std::size_t> hash_;
  std::vector<double> sign_;
};

/// Ordered list of independent hash families over the same (d, m).
/// Family i of a seeded set uses derive_seed(master, i).
class SketchFamilySet {
 public:
  SketchFamilySet(std::uint64_t master_seed, std::size_t dim_in, std::size_t dim_out,
                  std::size_t count);
  explicit SketchFamilySet(std::vector<HashFamily> families);

  std::size_t size() const noexcept { return families_.size(); }
  std::size_t dim_in() const noexcept { return dim_in_; }
  std::size_t dim_out() const noexcept { return dim_out_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const HashFamily& operator[](std::size_t i) const { return families_.at(i); }
  std::span<const HashFamily> families() const noexcept { return families_; }

 private:
  std::uint64_t master_seed_ = 0;
  std::size_t dim_in_ = 0;
  std::size_t dim_out_ = 0;
  std::vector<HashFamily> families_;
};

/// Row-wise CountSketch, n x d -> n x m.
DenseMatrix count_sketch(const DenseMatrix& u, const HashFamily& family);

/// Degree-k TensorSketch of every row using families[0..k-1]: the inverse
/// FFT of the product of the FFTs of the k CountSketches. Degree 0 returns
/// an n x 1 column of ones.
DenseMatrix tensor_sketch(const DenseMatrix& u, const SketchFamilySet& families, std::size_t degree);

/// One recursion step: circular convolution of each row of `prev` with the
/// CountSketch of the matching row of `u` under `family`. A single-column
/// `prev` (degree 0) acts as a scaled delta, giving the scaled CountSketch.
DenseMatrix tensor_sketch_step(const DenseMatrix& prev, const DenseMatrix& u, const HashFamily& family);

/// Definitional TensorSketch of one vector: sums over all d^k index tuples.
/// Exponential cost; requires d^k <= 1e6. Intended as a test oracle.
Vector tensor_sketch_direct(std::span<const double> u, const SketchFamilySet& families, std::size_t degree);

/// (2 + 3^k) * (sum_i ||u_i||^{2k}) * (sum_i ||v_i||^{2k}) / m: upper bound on
/// E ||(U V^T)^k - T_U T_V^T||_F^2 for the degree-k TensorSketch.
double tensor_sketch_variance_bound(const DenseMatrix& u, const DenseMatrix& v, std::size_t degree,
                                    std::size_t m);

}  // namespace pts::sketch
