#include "pts/sketch/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "pts/error.hpp"
#include "pts/numkit/fft.hpp"
#include "pts/numkit/random.hpp"

namespace pts::sketch {

namespace {

using cd = std::complex<double>;

void require_dims(const DenseMatrix& u, std::size_t dim_in, const char* who) {
  if (u.cols() != dim_in) {
    throw DimensionMismatch(std::string(who) + ": input has " + std::to_string(u.cols()) +
                            " columns, family expects " + std::to_string(dim_in));
  }
}

}  // namespace

HashFamily::HashFamily(std::uint64_t seed, std::size_t dim_in, std::size_t dim_out)
    : dim_out_(dim_out), seed_(seed), hash_(dim_in), sign_(dim_in) {
  if (dim_out == 0) throw InvalidArgument("HashFamily: sketch dimension must be >= 1");
  SplitMix64 gen(seed);
  for (std::size_t i = 0; i < dim_in; ++i) {
    hash_[i] = static_cast<std::size_t>(gen.below(dim_out));
    sign_[i] = (gen() >> 63) ? -1.0 : 1.0;
  }
}

HashFamily::HashFamily(std::vector<std::size_t> hash, std::vector<int> sign, std::size_t dim_out)
    : dim_out_(dim_out), seed_(0), hash_(std::move(hash)), sign_(sign.size()) {
  if (dim_out == 0) throw InvalidArgument("HashFamily: sketch dimension must be >= 1");
  if (sign.size() != hash_.size()) throw DimensionMismatch("HashFamily: hash/sign length mismatch");
  for (std::size_t i = 0; i < hash_.size(); ++i) {
    if (hash_[i] >= dim_out) throw InvalidArgument("HashFamily: hash value out of range");
    if (sign[i] != 1 && sign[i] != -1) throw InvalidArgument("HashFamily: sign must be +1 or -1");
    sign_[i] = static_cast<double>(sign[i]);
  }
}

void HashFamily::apply(std::span<const double> u, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < hash_.size(); ++i) out[hash_[i]] += sign_[i] * u[i];
}

SketchFamilySet::SketchFamilySet(std::uint64_t master_seed, std::size_t dim_in, std::size_t dim_out,
                                 std::size_t count)
    : master_seed_(master_seed), dim_in_(dim_in), dim_out_(dim_out) {
  families_.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    families_.emplace_back(derive_seed(master_seed, i), dim_in, dim_out);
}

SketchFamilySet::SketchFamilySet(std::vector<HashFamily> families) : families_(std::move(families)) {
  if (families_.empty()) return;
  dim_in_ = families_.front().dim_in();
  dim_out_ = families_.front().dim_out();
  for (const auto& f : families_) {
    if (f.dim_in() != dim_in_ || f.dim_out() != dim_out_)
      throw DimensionMismatch("SketchFamilySet: families disagree on (d, m)");
  }
}

DenseMatrix count_sketch(const DenseMatrix& u, const HashFamily& family) {
  require_dims(u, family.dim_in(), "count_sketch");
  DenseMatrix out(u.rows(), family.dim_out());
  for (std::size_t i = 0; i < u.rows(); ++i) family.apply(u.row(i), out.row(i));
  return out;
}

DenseMatrix tensor_sketch(const DenseMatrix& u, const SketchFamilySet& families, std::size_t degree) {
  if (degree > families.size()) {
    throw InvalidArgument("tensor_sketch: degree " + std::to_string(degree) + " exceeds " +
                          std::to_string(families.size()) + " available families");
  }
  if (degree == 0) return DenseMatrix(u.rows(), 1, 1.0);
  if (degree == 1) return count_sketch(u, families[0]);
  require_dims(u, families.dim_in(), "tensor_sketch");

  const std::size_t m = families.dim_out();
  FftPlan plan(m);
  DenseMatrix out(u.rows(), m);
  std::vector<cd> acc(m), buf(m), scratch;
  Vector cs(m);
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < degree; ++j) {
      families[j].apply(u.row(i), cs);
      auto& target = j == 0 ? acc : buf;
      for (std::size_t t = 0; t < m; ++t) target[t] = cs[t];
      plan.forward(target, scratch);
      if (j > 0)
        for (std::size_t t = 0; t < m; ++t) acc[t] *= buf[t];
    }
    plan.inverse(acc, scratch);
    auto row = out.row(i);
    for (std::size_t t = 0; t < m; ++t) row[t] = acc[t].real();
  }
  return out;
}

DenseMatrix tensor_sketch_step(const DenseMatrix& prev, const DenseMatrix& u, const HashFamily& family) {
  require_dims(u, family.dim_in(), "tensor_sketch_step");
  if (prev.rows() != u.rows()) throw DimensionMismatch("tensor_sketch_step: row count mismatch");
  const std::size_t m = family.dim_out();
  if (prev.cols() != 1 && prev.cols() != m)
    throw DimensionMismatch("tensor_sketch_step: previous sketch width must be 1 or m");

  DenseMatrix out = count_sketch(u, family);
  if (prev.cols() == 1) {
    for (std::size_t i = 0; i < u.rows(); ++i)
      for (double& v : out.row(i)) v *= prev(i, 0);
    return out;
  }
  FftPlan plan(m);
  std::vector<cd> a(m), b(m), scratch;
  for (std::size_t i = 0; i < u.rows(); ++i) {
    auto p = prev.row(i);
    auto o = out.row(i);
    for (std::size_t t = 0; t < m; ++t) {
      a[t] = p[t];
      b[t] = o[t];
    }
    plan.forward(a, scratch);
    plan.forward(b, scratch);
    for (std::size_t t = 0; t < m; ++t) a[t] *= b[t];
    plan.inverse(a, scratch);
    for (std::size_t t = 0; t < m; ++t) o[t] = a[t].real();
  }
  return out;
}

Vector tensor_sketch_direct(std::span<const double> u, const SketchFamilySet& families, std::size_t degree) {
  if (degree > families.size()) throw InvalidArgument("tensor_sketch_direct: not enough families");
  if (degree == 0) return Vector{1.0};
  const std::size_t d = u.size();
  const std::size_t m = families.dim_out();
  if (d != families.dim_in()) throw DimensionMismatch("tensor_sketch_direct: dimension mismatch");

  double tuples = std::pow(static_cast<double>(d), static_cast<double>(degree));
  if (tuples > 1e6) throw InvalidArgument("tensor_sketch_direct: d^k exceeds 1e6");

  Vector out(m, 0.0);
  if (d == 0) return out;
  std::vector<std::size_t> idx(degree, 0);
  while (true) {
    std::size_t bucket = 0;
    double value = 1.0;
    for (std::size_t j = 0; j < degree; ++j) {
      const auto& fam = families[j];
      bucket += fam.hash()[idx[j]];
      value *= fam.sign()[idx[j]] * u[idx[j]];
    }
    out[bucket % m] += value;

    std::size_t pos = 0;
    while (pos < degree && ++idx[pos] == d) idx[pos++] = 0;
    if (pos == degree) break;
  }
  return out;
}

double tensor_sketch_variance_bound(const DenseMatrix& u, const DenseMatrix& v, std::size_t degree,
                                    std::size_t m) {
  if (m == 0) throw InvalidArgument("tensor_sketch_variance_bound: m must be >= 1");
  const auto k = static_cast<unsigned>(degree);
  return (2.0 + std::pow(3.0, k)) * row_norm_power_sum(u, k) * row_norm_power_sum(v, k) /
         static_cast<double>(m);
}

}  // namespace pts::sketch
