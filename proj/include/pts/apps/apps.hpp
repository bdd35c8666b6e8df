#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pts/coeffs/coeffs.hpp"
#include "pts/numkit/matrix.hpp"
#include "pts/polyts/polyts.hpp"

namespace pts::apps {

/// Where the polynomial coefficients of a sketched kernel come from.
enum class CoefficientMethod {
  Coreset,          // coreset ridge regression (default)
  Exact,            // ridge regression over every entry
  Taylor,           // truncated Taylor series of exp
  ChebyshevSeries,  // Chebyshev interpolant on [-a, a]
};

struct PolyOptions {
  std::size_t m = 10;
  std::size_t r = 10;
  std::size_t k_centers = 10;
  std::uint64_t seed = 0;
  CoefficientMethod method = CoefficientMethod::Coreset;
  coeffs::Basis basis = coeffs::Basis::Chebyshev;  // regression basis for Coreset / Exact
};

/// Fits coefficients of exp(scale * x) over the entries of U V^T.
coeffs::CoeffSolution fit_exp_coefficients(const DenseMatrix& u, const DenseMatrix& v, double scale,
                                           const PolyOptions& opts);

// ---------------------------------------------------------------------------
// RBF kernel K_ij = exp(-||u_i - u_j||^2 / gamma)

/// K = diag(z) exp(2 U U^T / gamma) diag(z) with z_i = exp(-||u_i||^2 / gamma);
/// the middle factor is held as a sketched operator.
struct RbfFactorization {
  Vector z_scale;
  polyts::FactoredOperator op;
  double gamma;
  coeffs::CoeffSolution coefficients;

  std::size_t size() const noexcept { return z_scale.size(); }
  Vector apply(std::span<const double> x) const;
  double entry(std::size_t i, std::size_t j) const;
  DenseMatrix materialize() const;
};

RbfFactorization rbf_factorize(const DenseMatrix& u, double gamma, std::size_t m, std::size_t r,
                               std::size_t k_centers, std::uint64_t seed);
RbfFactorization rbf_factorize(const DenseMatrix& u, double gamma, const PolyOptions& opts);

double rbf_entry(std::span<const double> x, std::span<const double> y, double gamma);
/// Dense exact RBF kernel between the rows of x and y.
DenseMatrix rbf_kernel(const DenseMatrix& x, const DenseMatrix& y, double gamma);

/// Random Fourier features phi(u) = sqrt(2 / D) cos(W u + b) with
/// W_ij ~ Normal(0, 2 / gamma) and b ~ Uniform[0, 2 pi), so that
/// E <phi(x), phi(y)> = exp(-||x - y||^2 / gamma).
class RffMap {
 public:
  RffMap(std::size_t dim_in, std::size_t dim_out, double gamma, std::uint64_t seed);
  DenseMatrix features(const DenseMatrix& u) const;
  std::size_t dim_out() const noexcept { return phase_.size(); }

 private:
  DenseMatrix freq_;  // dim_out x dim_in
  Vector phase_;
};

DenseMatrix rff_features(const DenseMatrix& u, double gamma, std::size_t dim_out, std::uint64_t seed);

/// Nystrom approximation K ~ C P C'^T where C = K(rows, S), C' = K(cols, S)
/// and P = K(S, S)^+ (eigenvalues below 1e-10 * lambda_max dropped).
struct NystromFactor {
  std::vector<std::size_t> landmarks;  // indices into the sampled pool
  DenseMatrix left;                    // n1 x s
  DenseMatrix right;                   // n2 x s
  DenseMatrix pinv;                    // s x s

  Vector apply(std::span<const double> x) const;
  Vector apply_transpose(std::span<const double> y) const;
  double entry(std::size_t i, std::size_t j) const;
  DenseMatrix materialize() const;
};

/// Samples s rows of U uniformly without replacement.
NystromFactor nystrom_approx(const DenseMatrix& u, double gamma, std::size_t s, std::uint64_t seed);
/// Cross-kernel variant between x and y; landmarks are drawn from the rows of
/// x followed by the rows of y.
NystromFactor nystrom_cross(const DenseMatrix& x, const DenseMatrix& y, double gamma, std::size_t s,
                            std::uint64_t seed);
/// ceil(max(sqrt(r m), r)): the landmark count with cost comparable to a
/// degree-r, dimension-m sketch.
std::size_t nystrom_default_size(std::size_t m, std::size_t r);

// ---------------------------------------------------------------------------
// Sinkhorn with K_ij = exp(-gamma ||x_i - y_j||^2)

/// Kernel seen by Sinkhorn. Only products and single entries are exposed, so
/// factored kernels never form an n x n matrix.
class TransportKernel {
 public:
  virtual ~TransportKernel() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual Vector apply(std::span<const double> v) const = 0;
  virtual Vector apply_transpose(std::span<const double> u) const = 0;
  virtual double entry(std::size_t i, std::size_t j) const = 0;
  /// True when products are exact, so the objective can be evaluated exactly.
  virtual bool exact() const { return false; }
};

enum class KernelKind { Exact, PolyTs, Rff, Nystrom };

struct SinkhornParams {
  KernelKind kernel = KernelKind::Exact;
  std::size_t m = 20;
  std::size_t r = 3;
  std::size_t k_centers = 10;
  std::uint64_t seed = 0;
  CoefficientMethod method = CoefficientMethod::Coreset;
  std::size_t rff_dim = 0;           // 0: m * r
  std::size_t nystrom_size = 0;      // 0: nystrom_default_size(m, r)
  std::size_t objective_samples = 1024;
};

std::unique_ptr<TransportKernel> make_transport_kernel(const DenseMatrix& x, const DenseMatrix& y, double gamma,
                                                       const SinkhornParams& params);

struct SinkhornState {
  Vector u;
  Vector v;
  Vector a;
  Vector b;
  std::size_t iterations = 0;
  double objective = 0.0;  // sum_ij u_i K_ij v_j ||x_i - y_j||^2
};

struct SinkhornIteration {
  double wall_ms = 0.0;
  std::size_t clamped = 0;         // kernel products raised to the positivity floor
  double marginal_residual = 0.0;  // ||u o (K v) - a||_1
};

struct SinkhornResult {
  SinkhornState state;
  std::vector<SinkhornIteration> trace;
  double objective_std_error = 0.0;  // 0 when evaluated exactly
  double setup_ms = 0.0;
};

/// Floor applied to kernel products before division.
inline constexpr double kPositivityFloor = 1e-30;

/// Runs `iters` sweeps u = a / (K v), v = b / (K^T u) from v = 1. With an
/// exact kernel the objective is evaluated exactly through d + 2 kernel
/// products; otherwise it is estimated from `objective_samples` uniformly
/// drawn entries.
SinkhornResult sinkhorn(const DenseMatrix& x, const DenseMatrix& y, std::span<const double> a,
                        std::span<const double> b, double gamma, std::size_t iters, const SinkhornParams& params);

SinkhornResult sinkhorn_with_kernel(const TransportKernel& kernel, const DenseMatrix& x, const DenseMatrix& y,
                                    std::span<const double> a, std::span<const double> b, std::size_t iters,
                                    const SinkhornParams& params);

/// sum_ij u_i K_ij v_j ||x_i - y_j||^2 through kernel products on
/// coordinate-scaled vectors.
double transport_objective(const TransportKernel& kernel, const DenseMatrix& x, const DenseMatrix& y,
                           std::span<const double> u, std::span<const double> v);

// ---------------------------------------------------------------------------
// Feature maps

struct FeatureMap {
  DenseMatrix features;  // n x (1 + r m): [sqrt(c_0) T^(0), ..., sqrt(c_r) T^(r)]
  coeffs::CoeffSolution coefficients;
};

/// Linear features whose Gram matrix estimates f(U U^T), using non-negative
/// coreset-fitted coefficients.
FeatureMap feature_map(const DenseMatrix& u, const coeffs::ScalarFunction& f, std::size_t m, std::size_t r,
                       std::size_t k_centers, std::uint64_t seed);

/// Concatenates sqrt(c_j) T^(j) for given non-negative coefficients.
DenseMatrix sketch_features(const DenseMatrix& u, std::span<const double> coeffs, std::size_t m,
                            std::uint64_t seed);

}  // namespace pts::apps
