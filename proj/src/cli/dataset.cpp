#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string_view>
#include <utility>

#include "pts/cli/cli.hpp"
#include "pts/error.hpp"
#include "pts/numkit/random.hpp"

namespace pts::cli {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw DataError(source + ":" + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view tok, const std::string& source, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(source, line, "bad number '" + std::string(tok) + "'");
  if (!std::isfinite(v)) fail(source, line, "non-finite value '" + std::string(tok) + "'");
  return v;
}

long long parse_label(std::string_view tok, const std::string& source, std::size_t line) {
  long long v = 0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc() && ptr == tok.data() + tok.size()) return v;
  // accept integral floats such as "1.0"
  const double d = parse_double(tok, source, line);
  if (d != std::floor(d) || std::abs(d) > 9e15) fail(source, line, "label must be an integer");
  return static_cast<long long>(d);
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const std::string& source) {
  struct Entry {
    std::size_t col;
    double val;
  };
  std::vector<std::vector<Entry>> rows;
  std::vector<long long> labels;
  std::size_t dim = 0;

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::vector<Entry> row;
    std::size_t pos = 0;
    bool first = true;
    std::size_t last_idx = 0;
    while (pos < line.size()) {
      const auto end = line.find_first_of(" \t", pos);
      const std::string_view tok = line.substr(pos, end == std::string_view::npos ? end : end - pos);
      pos = end == std::string_view::npos ? line.size() : line.find_first_not_of(" \t", end);
      if (pos == std::string_view::npos) pos = line.size();
      if (first) {
        labels.push_back(parse_label(tok, source, lineno));
        first = false;
        continue;
      }
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) fail(source, lineno, "expected idx:val, got '" + std::string(tok) + "'");
      std::size_t idx = 0;
      const std::string_view itok = tok.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(itok.data(), itok.data() + itok.size(), idx);
      if (ec != std::errc() || ptr != itok.data() + itok.size() || idx == 0)
        fail(source, lineno, "bad feature index '" + std::string(itok) + "'");
      if (idx <= last_idx) fail(source, lineno, "feature indices must be strictly increasing");
      last_idx = idx;
      row.push_back({idx - 1, parse_double(tok.substr(colon + 1), source, lineno)});
    }
    dim = std::max(dim, last_idx);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(source + ": no data rows");
  if (dim == 0) throw DataError(source + ": no features");

  Dataset ds;
  ds.source = source;
  ds.features = DenseMatrix(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const Entry& e : rows[i]) ds.features(i, e.col) = e.val;
  ds.labels = std::move(labels);
  return ds;
}

Dataset parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_libsvm(in, path);
}

void write_libsvm(std::ostream& out, const DenseMatrix& features,
                  const std::optional<std::vector<long long>>& labels) {
  if (labels && labels->size() != features.rows()) throw DimensionMismatch("write_libsvm: label count mismatch");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out << (labels ? (*labels)[i] : 0LL);
    for (std::size_t j = 0; j < features.cols(); ++j) {
      const double v = features(i, j);
      if (v != 0.0) out << ' ' << (j + 1) << ':' << v;
    }
    out << '\n';
  }
}

void write_libsvm(const std::string& path, const DenseMatrix& features,
                  const std::optional<std::vector<long long>>& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_libsvm(out, features, labels);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

Dataset synthetic_gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw InvalidArgument("synthetic: n and d must be >= 1");
  Dataset ds;
  ds.features = gaussian_matrix(n, d, 1.0 / std::sqrt(static_cast<double>(d)), seed);
  ds.source = "synthetic:" + std::to_string(n) + "," + std::to_string(d) + "," + std::to_string(seed);
  return ds;
}

Dataset synthetic_source(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw InvalidArgument("synthetic: n and d must be >= 1");
  Dataset ds;
  ds.features = uniform_matrix(n, d, 0.0, 1.0, derive_seed(seed, 0));
  ds.source = "synthetic-source:" + std::to_string(n) + "," + std::to_string(d) + "," + std::to_string(seed);
  return ds;
}

Dataset synthetic_target(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw InvalidArgument("synthetic: n and d must be >= 1");
  Dataset ds;
  ds.features = uniform_matrix(n, d, 0.0, 1.0, derive_seed(seed, 1));
  for (double& x : ds.features.data()) x *= x;
  ds.source = "synthetic-target:" + std::to_string(n) + "," + std::to_string(d) + "," + std::to_string(seed);
  return ds;
}

}  // namespace pts::cli
