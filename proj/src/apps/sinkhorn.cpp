#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "pts/apps/apps.hpp"
#include "pts/error.hpp"
#include "pts/numkit/random.hpp"

namespace pts::apps {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

class ExactKernel final : public TransportKernel {
 public:
  ExactKernel(const DenseMatrix& x, const DenseMatrix& y, double gamma) : k_(rbf_kernel(x, y, 1.0 / gamma)) {}
  std::size_t rows() const override { return k_.rows(); }
  std::size_t cols() const override { return k_.cols(); }
  Vector apply(std::span<const double> v) const override { return matvec(k_, v); }
  Vector apply_transpose(std::span<const double> u) const override { return matvec_transpose(k_, u); }
  double entry(std::size_t i, std::size_t j) const override { return k_(i, j); }
  bool exact() const override { return true; }

 private:
  DenseMatrix k_;
};

// K = diag(z_x) Gamma diag(z_y), Gamma ~ exp(2 gamma X Y^T).
class PolyTsKernel final : public TransportKernel {
 public:
  PolyTsKernel(const DenseMatrix& x, const DenseMatrix& y, double gamma, const SinkhornParams& p)
      : op_(build(x, y, gamma, p)), zx_(row_squared_norms(x)), zy_(row_squared_norms(y)) {
    for (double& z : zx_) z = std::exp(-gamma * z);
    for (double& z : zy_) z = std::exp(-gamma * z);
  }
  std::size_t rows() const override { return zx_.size(); }
  std::size_t cols() const override { return zy_.size(); }
  Vector apply(std::span<const double> v) const override { return scaled(op_, zx_, zy_, v, false); }
  Vector apply_transpose(std::span<const double> u) const override { return scaled(op_, zy_, zx_, u, true); }
  double entry(std::size_t i, std::size_t j) const override { return zx_[i] * op_.entry(i, j) * zy_[j]; }

 private:
  static polyts::FactoredOperator build(const DenseMatrix& x, const DenseMatrix& y, double gamma,
                                        const SinkhornParams& p) {
    PolyOptions opts;
    opts.m = p.m;
    opts.r = p.r;
    opts.k_centers = p.k_centers;
    opts.seed = p.seed;
    opts.method = p.method;
    const coeffs::CoeffSolution sol = fit_exp_coefficients(x, y, 2.0 * gamma, opts);
    return polyts::poly_tensor_sketch(x, y, sol.monomial_coeffs, p.m, derive_seed(p.seed, 0));
  }

  static Vector scaled(const polyts::FactoredOperator& op, const Vector& out_scale, const Vector& in_scale,
                       std::span<const double> x, bool transpose) {
    Vector t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = in_scale[i] * x[i];
    Vector y = transpose ? op.apply_transpose(t) : op.apply(t);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= out_scale[i];
    return y;
  }

  polyts::FactoredOperator op_;
  Vector zx_;
  Vector zy_;
};

class RffKernel final : public TransportKernel {
 public:
  RffKernel(const DenseMatrix& x, const DenseMatrix& y, double gamma, const SinkhornParams& p) {
    const std::size_t dim = p.rff_dim > 0 ? p.rff_dim : p.m * p.r;
    const RffMap map(x.cols(), dim, 1.0 / gamma, p.seed);
    fx_ = map.features(x);
    fy_ = map.features(y);
  }
  std::size_t rows() const override { return fx_.rows(); }
  std::size_t cols() const override { return fy_.rows(); }
  Vector apply(std::span<const double> v) const override { return matvec(fx_, matvec_transpose(fy_, v)); }
  Vector apply_transpose(std::span<const double> u) const override {
    return matvec(fy_, matvec_transpose(fx_, u));
  }
  double entry(std::size_t i, std::size_t j) const override { return dot(fx_.row(i), fy_.row(j)); }

 private:
  DenseMatrix fx_;
  DenseMatrix fy_;
};

class NystromKernel final : public TransportKernel {
 public:
  NystromKernel(const DenseMatrix& x, const DenseMatrix& y, double gamma, const SinkhornParams& p)
      : f_(nystrom_cross(x, y, 1.0 / gamma, p.nystrom_size > 0 ? p.nystrom_size : nystrom_default_size(p.m, p.r),
                         p.seed)) {}
  std::size_t rows() const override { return f_.left.rows(); }
  std::size_t cols() const override { return f_.right.rows(); }
  Vector apply(std::span<const double> v) const override { return f_.apply(v); }
  Vector apply_transpose(std::span<const double> u) const override { return f_.apply_transpose(u); }
  double entry(std::size_t i, std::size_t j) const override { return f_.entry(i, j); }

 private:
  NystromFactor f_;
};

void check_marginal(std::span<const double> p, std::size_t n, const char* name) {
  if (p.size() != n) throw DimensionMismatch(std::string("sinkhorn: marginal ") + name + " has wrong length");
  double s = 0.0;
  for (double x : p) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw InvalidArgument(std::string("sinkhorn: marginal ") + name + " must be positive");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-9) throw InvalidArgument(std::string("sinkhorn: marginal ") + name + " must sum to 1");
}

// out = p / max(kv, floor); returns the number of clamped entries.
std::size_t scale_update(std::span<const double> p, const Vector& kv, Vector& out, std::size_t iteration) {
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < kv.size(); ++i) {
    double d = kv[i];
    if (std::isnan(d)) throw PositivityFailure("sinkhorn: kernel product is NaN", iteration);
    if (d < kPositivityFloor) {
      d = kPositivityFloor;
      ++clamped;
    }
    out[i] = p[i] / d;
    if (!(out[i] > 0.0) || !std::isfinite(out[i]))
      throw PositivityFailure("sinkhorn: scaling left the positive reals", iteration);
  }
  return clamped;
}

double marginal_residual(const TransportKernel& k, const Vector& u, const Vector& v, std::span<const double> a) {
  const Vector kv = k.apply(v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::abs(u[i] * kv[i] - a[i]);
  return s;
}

}  // namespace

std::unique_ptr<TransportKernel> make_transport_kernel(const DenseMatrix& x, const DenseMatrix& y, double gamma,
                                                       const SinkhornParams& params) {
  if (x.cols() != y.cols()) throw DimensionMismatch("sinkhorn: point sets differ in dimension");
  if (x.rows() == 0 || y.rows() == 0) throw InvalidArgument("sinkhorn: empty point set");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("sinkhorn: gamma must be > 0");
  switch (params.kernel) {
    case KernelKind::Exact: return std::make_unique<ExactKernel>(x, y, gamma);
    case KernelKind::PolyTs: return std::make_unique<PolyTsKernel>(x, y, gamma, params);
    case KernelKind::Rff: return std::make_unique<RffKernel>(x, y, gamma, params);
    case KernelKind::Nystrom: return std::make_unique<NystromKernel>(x, y, gamma, params);
  }
  throw InvalidArgument("sinkhorn: unknown kernel kind");
}

double transport_objective(const TransportKernel& kernel, const DenseMatrix& x, const DenseMatrix& y,
                           std::span<const double> u, std::span<const double> v) {
  // sum_ij u_i K_ij v_j (|x_i|^2 + |y_j|^2 - 2 <x_i, y_j>)
  const std::size_t n1 = x.rows();
  const std::size_t n2 = y.rows();
  const Vector x2 = row_squared_norms(x);
  const Vector y2 = row_squared_norms(y);

  const Vector kv = kernel.apply(v);
  Vector vy(n2);
  for (std::size_t j = 0; j < n2; ++j) vy[j] = v[j] * y2[j];
  const Vector kvy = kernel.apply(vy);

  double total = 0.0;
  for (std::size_t i = 0; i < n1; ++i) total += u[i] * (x2[i] * kv[i] + kvy[i]);

  Vector vc(n2);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t j = 0; j < n2; ++j) vc[j] = v[j] * y(j, c);
    const Vector kc = kernel.apply(vc);
    double s = 0.0;
    for (std::size_t i = 0; i < n1; ++i) s += u[i] * x(i, c) * kc[i];
    total -= 2.0 * s;
  }
  return total;
}

SinkhornResult sinkhorn_with_kernel(const TransportKernel& kernel, const DenseMatrix& x, const DenseMatrix& y,
                                    std::span<const double> a, std::span<const double> b, std::size_t iters,
                                    const SinkhornParams& params) {
  const std::size_t n1 = kernel.rows();
  const std::size_t n2 = kernel.cols();
  if (x.rows() != n1 || y.rows() != n2) throw DimensionMismatch("sinkhorn: point sets do not match the kernel");
  check_marginal(a, n1, "a");
  check_marginal(b, n2, "b");

  SinkhornResult res;
  SinkhornState& st = res.state;
  st.a.assign(a.begin(), a.end());
  st.b.assign(b.begin(), b.end());
  st.u.assign(n1, 1.0);
  st.v.assign(n2, 1.0);
  res.trace.reserve(iters);

  for (std::size_t it = 0; it < iters; ++it) {
    SinkhornIteration rec;
    const auto t0 = Clock::now();
    rec.clamped = scale_update(a, kernel.apply(st.v), st.u, it);
    rec.clamped += scale_update(b, kernel.apply_transpose(st.u), st.v, it);
    rec.wall_ms = elapsed_ms(t0);
    rec.marginal_residual = marginal_residual(kernel, st.u, st.v, a);
    res.trace.push_back(rec);
    st.iterations = it + 1;
  }

  if (kernel.exact()) {
    st.objective = transport_objective(kernel, x, y, st.u, st.v);
    res.objective_std_error = 0.0;
  } else {
    // n1 n2 * mean of u_i K_ij v_j D_ij over uniformly drawn pairs
    const std::size_t samples = std::max<std::size_t>(1, params.objective_samples);
    SplitMix64 gen(derive_seed(params.seed, 2));
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t i = gen.below(n1);
      const std::size_t j = gen.below(n2);
      const double val = st.u[i] * kernel.entry(i, j) * st.v[j] * squared_distance(x.row(i), y.row(j));
      const double delta = val - mean;
      mean += delta / static_cast<double>(s + 1);
      m2 += delta * (val - mean);
    }
    const double scale = static_cast<double>(n1) * static_cast<double>(n2);
    const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
    st.objective = scale * mean;
    res.objective_std_error = scale * std::sqrt(var / static_cast<double>(samples));
  }
  return res;
}

SinkhornResult sinkhorn(const DenseMatrix& x, const DenseMatrix& y, std::span<const double> a,
                        std::span<const double> b, double gamma, std::size_t iters, const SinkhornParams& params) {
  const auto t0 = Clock::now();
  const std::unique_ptr<TransportKernel> kernel = make_transport_kernel(x, y, gamma, params);
  const double setup = elapsed_ms(t0);
  SinkhornResult res = sinkhorn_with_kernel(*kernel, x, y, a, b, iters, params);
  res.setup_ms = setup;
  return res;
}

}  // namespace pts::apps
