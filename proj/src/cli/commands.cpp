#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "pts/apps/apps.hpp"
#include "pts/cli/cli.hpp"
#include "pts/error.hpp"
#include "pts/numkit/random.hpp"
#include "pts/sketch/sketch.hpp"

namespace pts::cli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double median(Vector xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

// Runs `build` once as warmup and `reps` more times, returning the last
// result and the median wall time of the timed runs.
template <typename F>
auto timed(std::size_t reps, F&& build) {
  if (reps <= 1) {
    const auto t0 = Clock::now();
    auto out = build();
    return std::make_pair(std::move(out), ms_since(t0));
  }
  auto out = build();
  Vector times;
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    out = build();
    times.push_back(ms_since(t0));
  }
  return std::make_pair(std::move(out), median(times));
}

// Runs fn(t) for every trial on a small worker pool; reports stay in trial
// order. The first exception is rethrown.
Report run_trials(std::size_t trials, std::size_t threads, const std::function<Report(std::size_t)>& fn) {
  std::vector<Report> parts(trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t t = next++; t < trials; t = next++) {
      try {
        parts[t] = fn(t);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(trials, 1));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  Report out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Kernel estimate exposing single entries and a dense form.
class Estimate {
 public:
  virtual ~Estimate() = default;
  virtual double entry(std::size_t i, std::size_t j) const = 0;
  virtual DenseMatrix dense() const = 0;
};

class PolyEstimate final : public Estimate {
 public:
  explicit PolyEstimate(apps::RbfFactorization f) : f_(std::move(f)) {}
  double entry(std::size_t i, std::size_t j) const override { return f_.entry(i, j); }
  DenseMatrix dense() const override { return f_.materialize(); }

 private:
  apps::RbfFactorization f_;
};

class FeatureEstimate final : public Estimate {
 public:
  explicit FeatureEstimate(DenseMatrix phi) : phi_(std::move(phi)) {}
  double entry(std::size_t i, std::size_t j) const override { return dot(phi_.row(i), phi_.row(j)); }
  DenseMatrix dense() const override { return multiply_transposed(phi_, phi_); }

 private:
  DenseMatrix phi_;
};

class NystromEstimate final : public Estimate {
 public:
  explicit NystromEstimate(apps::NystromFactor f) : f_(std::move(f)) {}
  double entry(std::size_t i, std::size_t j) const override { return f_.entry(i, j); }
  DenseMatrix dense() const override { return f_.materialize(); }

 private:
  apps::NystromFactor f_;
};

class ExactEstimate final : public Estimate {
 public:
  ExactEstimate(const DenseMatrix& x, double gamma) : x_(x), gamma_(gamma) {}
  double entry(std::size_t i, std::size_t j) const override { return apps::rbf_entry(x_.row(i), x_.row(j), gamma_); }
  DenseMatrix dense() const override { return apps::rbf_kernel(x_, x_, gamma_); }

 private:
  const DenseMatrix& x_;
  double gamma_;
};

std::unique_ptr<Estimate> build_estimate(const ExperimentConfig& c, const DenseMatrix& x, std::uint64_t seed) {
  apps::PolyOptions opts;
  opts.m = c.m;
  opts.r = c.r;
  opts.k_centers = c.k_centers;
  opts.seed = seed;
  switch (c.method) {
    case Method::CoresetTs:
      opts.method = apps::CoefficientMethod::Coreset;
      return std::make_unique<PolyEstimate>(apps::rbf_factorize(x, c.gamma, opts));
    case Method::TaylorTs:
      opts.method = apps::CoefficientMethod::Taylor;
      return std::make_unique<PolyEstimate>(apps::rbf_factorize(x, c.gamma, opts));
    case Method::ChebyshevTs:
      opts.method = apps::CoefficientMethod::ChebyshevSeries;
      return std::make_unique<PolyEstimate>(apps::rbf_factorize(x, c.gamma, opts));
    case Method::Rff:
      return std::make_unique<FeatureEstimate>(apps::rff_features(x, c.gamma, c.m * c.r, seed));
    case Method::Nystrom:
      return std::make_unique<NystromEstimate>(
          apps::nystrom_approx(x, c.gamma, std::min(x.rows(), apps::nystrom_default_size(c.m, c.r)), seed));
    case Method::Exact:
      return std::make_unique<ExactEstimate>(x, c.gamma);
  }
  throw InvalidArgument("unknown method");
}

struct KernelError {
  double frob = 0.0;
  double entry_mean = 0.0;
};

// Dense comparison against the exact kernel (given), or sampled pairs when
// `exact` is empty.
KernelError kernel_error(const DenseMatrix& x, double gamma, const DenseMatrix& exact,
                         const std::function<double(std::size_t, std::size_t)>& entry,
                         const std::function<DenseMatrix()>& dense, std::uint64_t seed) {
  double diff_sq = 0.0, ref_sq = 0.0, diff_abs = 0.0, ref_abs = 0.0;
  auto add = [&](double est, double ref) {
    const double d = est - ref;
    diff_sq += d * d;
    ref_sq += ref * ref;
    diff_abs += std::abs(d);
    ref_abs += std::abs(ref);
  };
  if (!exact.empty()) {
    const DenseMatrix est = dense();
    for (std::size_t i = 0; i < exact.size(); ++i) add(est.data()[i], exact.data()[i]);
  } else {
    SplitMix64 gen(derive_seed(seed, 3));
    const std::size_t n = x.rows();
    for (std::size_t s = 0; s < kSampledErrorPairs; ++s) {
      const std::size_t i = gen.below(n);
      const std::size_t j = gen.below(n);
      add(entry(i, j), apps::rbf_entry(x.row(i), x.row(j), gamma));
    }
  }
  KernelError e;
  e.frob = ref_sq > 0.0 ? std::sqrt(diff_sq / ref_sq) : std::sqrt(diff_sq);
  e.entry_mean = ref_abs > 0.0 ? diff_abs / ref_abs : diff_abs;
  return e;
}

CsvRow row(const ExperimentConfig& c, std::uint64_t seed, std::string metric, double value) {
  return CsvRow{method_name(c.method), c.m, c.r, c.gamma, seed, std::move(metric), value};
}

apps::SinkhornParams sinkhorn_params(const ExperimentConfig& c, std::uint64_t seed) {
  apps::SinkhornParams p;
  p.m = c.m;
  p.r = c.r;
  p.k_centers = c.k_centers;
  p.seed = seed;
  switch (c.method) {
    case Method::CoresetTs:
      p.kernel = apps::KernelKind::PolyTs;
      p.method = apps::CoefficientMethod::Coreset;
      break;
    case Method::TaylorTs:
      p.kernel = apps::KernelKind::PolyTs;
      p.method = apps::CoefficientMethod::Taylor;
      break;
    case Method::ChebyshevTs:
      p.kernel = apps::KernelKind::PolyTs;
      p.method = apps::CoefficientMethod::ChebyshevSeries;
      break;
    case Method::Rff: p.kernel = apps::KernelKind::Rff; break;
    case Method::Nystrom: p.kernel = apps::KernelKind::Nystrom; break;
    case Method::Exact: p.kernel = apps::KernelKind::Exact; break;
  }
  return p;
}

// Barycentric image of each source point under the plan diag(u) K diag(v).
DenseMatrix transport_points(const apps::TransportKernel& k, const DenseMatrix& y, const Vector& v) {
  const Vector kv = k.apply(v);
  DenseMatrix out(k.rows(), y.cols());
  Vector vc(y.rows());
  for (std::size_t c = 0; c < y.cols(); ++c) {
    for (std::size_t j = 0; j < y.rows(); ++j) vc[j] = v[j] * y(j, c);
    const Vector kc = k.apply(vc);
    for (std::size_t i = 0; i < out.rows(); ++i) out(i, c) = kc[i] / std::max(kv[i], apps::kPositivityFloor);
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  if (c.m == 0) throw InvalidArgument("--m must be >= 1");
  if (c.k_centers == 0) throw InvalidArgument("--k must be >= 1");
  if (!(c.gamma > 0.0) || !std::isfinite(c.gamma)) throw InvalidArgument("--gamma must be > 0");
  if (c.trials == 0) throw InvalidArgument("--trials must be >= 1");
}

}  // namespace

ExperimentConfig ExperimentConfig::sinkhorn_defaults() {
  ExperimentConfig c;
  c.m = 20;
  c.r = 3;
  return c;
}

Method parse_method(const std::string& name) {
  if (name == "coreset-ts") return Method::CoresetTs;
  if (name == "taylor-ts") return Method::TaylorTs;
  if (name == "chebyshev-ts") return Method::ChebyshevTs;
  if (name == "rff") return Method::Rff;
  if (name == "nystrom") return Method::Nystrom;
  if (name == "exact") return Method::Exact;
  throw InvalidArgument("unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::CoresetTs: return "coreset-ts";
    case Method::TaylorTs: return "taylor-ts";
    case Method::ChebyshevTs: return "chebyshev-ts";
    case Method::Rff: return "rff";
    case Method::Nystrom: return "nystrom";
    case Method::Exact: return "exact";
  }
  return "?";
}

void write_csv(std::ostream& out, const Report& rows) {
  out << kCsvHeader << '\n';
  out << std::setprecision(17);
  for (const CsvRow& r : rows)
    out << r.method << ',' << r.m << ',' << r.r << ',' << r.gamma << ',' << r.seed << ',' << r.metric << ','
        << r.value << '\n';
}

std::string config_json(const ExperimentConfig& c, const std::string& command) {
  nlohmann::json j;
  j["command"] = command;
  j["csv_schema"] = kCsvSchemaVersion;
  j["csv_header"] = kCsvHeader;
  j["m"] = c.m;
  j["r"] = c.r;
  j["k"] = c.k_centers;
  j["gamma"] = c.gamma;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["method"] = method_name(c.method);
  j["iters"] = c.iters;
  j["threads"] = c.threads;
  j["timing_reps"] = c.timing_reps;
  return j.dump(2);
}

std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial) {
  return derive_seed(config.seed, trial);
}

Report cmd_kernel_approx(const ExperimentConfig& config, const Dataset& data) {
  validate(config);
  const DenseMatrix& x = data.features;
  if (x.rows() == 0) throw DataError("kernel-approx: empty dataset");
  const DenseMatrix exact = x.rows() <= kDenseErrorLimit ? apps::rbf_kernel(x, x, config.gamma) : DenseMatrix();

  return run_trials(config.trials, config.threads, [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(config, t);
    auto [est, wall] = timed(config.timing_reps, [&] { return build_estimate(config, x, seed); });
    const KernelError err = kernel_error(
        x, config.gamma, exact, [&](std::size_t i, std::size_t j) { return est->entry(i, j); },
        [&] { return est->dense(); }, seed);
    return Report{row(config, seed, "rel_error_frob", err.frob), row(config, seed, "rel_error_entry_mean", err.entry_mean),
                  row(config, seed, "wall_ms", wall)};
  });
}

Report cmd_sinkhorn(const ExperimentConfig& config, const Dataset& source, const Dataset& target,
                    DenseMatrix* transported) {
  validate(config);
  const DenseMatrix& x = source.features;
  const DenseMatrix& y = target.features;
  if (x.rows() == 0 || y.rows() == 0) throw DataError("sinkhorn: empty point set");
  if (x.cols() != y.cols()) throw DataError("sinkhorn: source and target dimensions differ");

  const Vector a(x.rows(), 1.0 / static_cast<double>(x.rows()));
  const Vector b(y.rows(), 1.0 / static_cast<double>(y.rows()));

  apps::SinkhornParams exact_params;
  exact_params.kernel = apps::KernelKind::Exact;
  const double exact_objective = apps::sinkhorn(x, y, a, b, config.gamma, config.iters, exact_params).state.objective;

  return run_trials(config.trials, config.threads, [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(config, t);
    const apps::SinkhornParams params = sinkhorn_params(config, seed);
    const auto kernel = apps::make_transport_kernel(x, y, config.gamma, params);
    const apps::SinkhornResult res = apps::sinkhorn_with_kernel(*kernel, x, y, a, b, config.iters, params);

    Vector times;
    std::size_t clamped = 0;
    for (const auto& it : res.trace) {
      times.push_back(it.wall_ms);
      clamped += it.clamped;
    }
    const double residual = res.trace.empty() ? 0.0 : res.trace.back().marginal_residual;
    if (transported && t == 0) *transported = transport_points(*kernel, y, res.state.v);

    return Report{row(config, seed, "n", static_cast<double>(x.rows())),
                  row(config, seed, "iterations", static_cast<double>(res.state.iterations)),
                  row(config, seed, "wall_ms_per_iter", median(times)),
                  row(config, seed, "objective", res.state.objective),
                  row(config, seed, "objective_std_error", res.objective_std_error),
                  row(config, seed, "objective_ratio", res.state.objective / exact_objective),
                  row(config, seed, "clamped_count", static_cast<double>(clamped)),
                  row(config, seed, "marginal_residual", residual)};
  });
}

Report cmd_features(const ExperimentConfig& config, const Dataset& data, const std::string& out_path) {
  validate(config);
  const DenseMatrix& x = data.features;
  if (x.rows() == 0) throw DataError("features: empty dataset");
  const double gamma = config.gamma;
  const std::uint64_t seed = trial_seed(config, 0);

  auto [fm, wall] = timed(config.timing_reps, [&] {
    apps::FeatureMap out = apps::feature_map(
        x, [gamma](double t) { return std::exp(2.0 * t / gamma); }, config.m, config.r,
        config.k_centers, seed);
    const Vector sq = row_squared_norms(x);
    for (std::size_t i = 0; i < out.features.rows(); ++i) {
      const double z = std::exp(-sq[i] / gamma);
      for (std::size_t j = 0; j < out.features.cols(); ++j) out.features(i, j) *= z;
    }
    return out;
  });
  write_libsvm(out_path, fm.features, data.labels);

  const DenseMatrix exact = x.rows() <= kDenseErrorLimit ? apps::rbf_kernel(x, x, gamma) : DenseMatrix();
  const DenseMatrix& phi = fm.features;
  const KernelError err = kernel_error(
      x, gamma, exact, [&](std::size_t i, std::size_t j) { return dot(phi.row(i), phi.row(j)); },
      [&] { return multiply_transposed(phi, phi); }, seed);

  const std::string name = "features";
  return Report{CsvRow{name, config.m, config.r, gamma, seed, "width", static_cast<double>(phi.cols())},
                CsvRow{name, config.m, config.r, gamma, seed, "rel_error_frob", err.frob},
                CsvRow{name, config.m, config.r, gamma, seed, "rel_error_entry_mean", err.entry_mean},
                CsvRow{name, config.m, config.r, gamma, seed, "wall_ms", wall}};
}

Report cmd_sketch_selftest(const ExperimentConfig& config) {
  validate(config);
  double max_diff = 0.0;
  std::size_t cases = 0;
  for (std::size_t d : {2, 3})
    for (std::size_t m : {2, 3, 4, 8})
      for (std::size_t degree = 0; degree <= 3; ++degree)
        for (std::size_t t = 0; t < config.trials; ++t) {
          const std::uint64_t seed = derive_seed(config.seed, cases);
          const DenseMatrix u = uniform_matrix(3, d, -1.0, 1.0, derive_seed(seed, 0));
          const sketch::SketchFamilySet fam(derive_seed(seed, 1), d, m, std::max<std::size_t>(degree, 1));
          const DenseMatrix fast = sketch::tensor_sketch(u, fam, degree);
          for (std::size_t i = 0; i < u.rows(); ++i) {
            const Vector slow = sketch::tensor_sketch_direct(u.row(i), fam, degree);
            for (std::size_t c = 0; c < slow.size(); ++c)
              max_diff = std::max(max_diff, std::abs(fast(i, c) - slow[c]));
          }
          ++cases;
        }
  const std::string name = "sketch-selftest";
  return Report{CsvRow{name, 0, 0, 0.0, config.seed, "cases", static_cast<double>(cases)},
                CsvRow{name, 0, 0, 0.0, config.seed, "max_abs_diff", max_diff},
                CsvRow{name, 0, 0, 0.0, config.seed, "passed", max_diff <= 1e-9 ? 1.0 : 0.0}};
}

}  // namespace pts::cli
