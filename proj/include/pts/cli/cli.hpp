#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pts/numkit/matrix.hpp"

namespace pts::cli {

struct Dataset {
  DenseMatrix features;
  std::optional<std::vector<long long>> labels;
  std::string source;  // file path or "synthetic:n,d,seed"

  std::size_t size() const noexcept { return features.rows(); }
};

/// LIBSVM text: "label idx:val idx:val ..." with 1-based strictly increasing
/// indices; d is the largest index seen, missing entries are 0. Blank lines
/// and lines starting with '#' are skipped. Errors carry the line number.
Dataset parse_libsvm(const std::string& path);
Dataset parse_libsvm(std::istream& in, const std::string& source);

/// Writes rows in LIBSVM format with 17 significant digits; zeros are
/// omitted. Rows without labels get label 0.
void write_libsvm(const std::string& path, const DenseMatrix& features,
                  const std::optional<std::vector<long long>>& labels);
void write_libsvm(std::ostream& out, const DenseMatrix& features,
                  const std::optional<std::vector<long long>>& labels);

/// n x d matrix with Normal(0, 1/d) entries.
Dataset synthetic_gaussian(std::size_t n, std::size_t d, std::uint64_t seed);

/// Sinkhorn point clouds: source ~ Uniform[0,1]^d, target is the elementwise
/// square of an independent Uniform[0,1]^d sample.
Dataset synthetic_source(std::size_t n, std::size_t d, std::uint64_t seed);
Dataset synthetic_target(std::size_t n, std::size_t d, std::uint64_t seed);

enum class Method { CoresetTs, TaylorTs, ChebyshevTs, Rff, Nystrom, Exact };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct ExperimentConfig {
  std::size_t m = 10;
  std::size_t r = 10;
  std::size_t k_centers = 10;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  Method method = Method::CoresetTs;
  std::size_t iters = 10;        // sinkhorn sweeps
  std::size_t threads = 1;       // trial worker pool
  std::size_t timing_reps = 5;   // timed repetitions after one warmup; median reported

  /// Defaults of the Sinkhorn and feature experiments (m = 20, r = 3).
  static ExperimentConfig sinkhorn_defaults();
};

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kCsvHeader = "method,m,r,gamma,seed,metric,value";

/// One long-format CSV record.
struct CsvRow {
  std::string method;
  std::size_t m = 0;
  std::size_t r = 0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

using Report = std::vector<CsvRow>;

void write_csv(std::ostream& out, const Report& rows);
/// JSON echo of the configuration (including the CSV schema version).
std::string config_json(const ExperimentConfig& config, const std::string& command);

/// Seed of trial t: derive_seed(config.seed, t).
std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial);

/// Relative kernel error of `method` against the exact RBF kernel
/// exp(-||x - y||^2 / gamma). Per trial: rel_error_frob, rel_error_entry_mean,
/// wall_ms. Dense comparison for n <= 5000, otherwise 65536 sampled entries.
Report cmd_kernel_approx(const ExperimentConfig& config, const Dataset& data);

inline constexpr std::size_t kDenseErrorLimit = 5000;
inline constexpr std::size_t kSampledErrorPairs = 65536;

/// Sinkhorn with kernel exp(-gamma ||x - y||^2) and uniform marginals.
/// Metrics: n, iterations, wall_ms_per_iter, objective, objective_std_error,
/// objective_ratio (against the exact kernel), clamped_count,
/// marginal_residual. When `transported` is given, receives the barycentric
/// image of each source point.
Report cmd_sinkhorn(const ExperimentConfig& config, const Dataset& source, const Dataset& target,
                    DenseMatrix* transported = nullptr);

/// Writes RBF features diag(z) [sqrt(c_0) T^(0) ... sqrt(c_r) T^(r)] in LIBSVM
/// format, labels preserved. Side report: width, gram rel_error_frob,
/// gram rel_error_entry_mean, wall_ms.
Report cmd_features(const ExperimentConfig& config, const Dataset& data, const std::string& out_path);

/// FFT-path TensorSketch against the direct definition over small (d, m,
/// degree) grids, `trials` seeds each. Metrics: cases, max_abs_diff, passed.
Report cmd_sketch_selftest(const ExperimentConfig& config);

}  // namespace pts::cli
