#include "pts/numkit/fft.hpp"

#include <cmath>
#include <numbers>

#include "pts/error.hpp"

namespace pts {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

ComplexVector::ComplexVector(std::vector<double> real, std::vector<double> imag)
    : re(std::move(real)), im(std::move(imag)) {
  if (re.size() != im.size()) throw DimensionMismatch("ComplexVector: re/im length mismatch");
}

void FftPlan::Radix2::init(std::size_t len) {
  n = len;
  bitrev.assign(n, 0);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    bitrev[i] = r;
  }
  twiddle.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(ang), std::sin(ang)};
  }
}

void FftPlan::Radix2::run(std::span<cd> x, bool inverse) const {
  for (std::size_t i = 0; i < n; ++i)
    if (i < bitrev[i]) std::swap(x[i], x[bitrev[i]]);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cd w = twiddle[k * step];
        if (inverse) w = std::conj(w);
        const cd u = x[start + k];
        const cd v = x[start + k + half] * w;
        x[start + k] = u + v;
        x[start + k + half] = u - v;
      }
    }
  }
}

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
  if (n == 0) throw InvalidArgument("FftPlan: length must be >= 1");
  if (pow2_) {
    core_.init(n);
    return;
  }
  core_.init(next_pow2(2 * n - 1));
  chirp_.resize(n);
  const std::size_t two_n = 2 * n;
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small and exact
    const std::size_t k2 = (k * k) % two_n;
    const double ang = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp_[k] = {std::cos(ang), std::sin(ang)};
  }
  chirp_fft_.assign(core_.n, cd{0.0, 0.0});
  chirp_fft_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    chirp_fft_[k] = std::conj(chirp_[k]);
    chirp_fft_[core_.n - k] = std::conj(chirp_[k]);
  }
  core_.run(chirp_fft_, false);
}

void FftPlan::forward(std::span<cd> x, std::vector<cd>& scratch) const {
  if (x.size() != n_) throw DimensionMismatch("FftPlan: input length mismatch");
  if (pow2_) {
    core_.run(x, false);
    return;
  }
  const std::size_t big = core_.n;
  scratch.assign(big, cd{0.0, 0.0});
  for (std::size_t k = 0; k < n_; ++k) scratch[k] = x[k] * chirp_[k];
  core_.run(scratch, false);
  for (std::size_t k = 0; k < big; ++k) scratch[k] *= chirp_fft_[k];
  core_.run(scratch, true);
  const double scale = 1.0 / static_cast<double>(big);
  for (std::size_t k = 0; k < n_; ++k) x[k] = scratch[k] * scale * chirp_[k];
}

void FftPlan::inverse(std::span<cd> x, std::vector<cd>& scratch) const {
  for (auto& v : x) v = std::conj(v);
  forward(x, scratch);
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : x) v = std::conj(v) * scale;
}

void FftPlan::forward(std::span<cd> x) const {
  std::vector<cd> scratch;
  forward(x, scratch);
}

void FftPlan::inverse(std::span<cd> x) const {
  std::vector<cd> scratch;
  inverse(x, scratch);
}

namespace {

ComplexVector transform(const ComplexVector& x, bool inverse) {
  if (x.size() == 0) throw InvalidArgument("fft: length must be >= 1");
  FftPlan plan(x.size());
  std::vector<std::complex<double>> buf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = {x.re[i], x.im[i]};
  if (inverse)
    plan.inverse(buf);
  else
    plan.forward(buf);
  ComplexVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.re[i] = buf[i].real();
    out.im[i] = buf[i].imag();
  }
  return out;
}

}  // namespace

ComplexVector fft_forward(const ComplexVector& x) { return transform(x, false); }
ComplexVector fft_inverse(const ComplexVector& x) { return transform(x, true); }

Vector circular_convolve(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("circular_convolve: length mismatch");
  if (x.empty()) throw InvalidArgument("circular_convolve: length must be >= 1");
  const std::size_t m = x.size();
  FftPlan plan(m);
  std::vector<std::complex<double>> fx(m), fy(m), scratch;
  for (std::size_t i = 0; i < m; ++i) {
    fx[i] = x[i];
    fy[i] = y[i];
  }
  plan.forward(fx, scratch);
  plan.forward(fy, scratch);
  for (std::size_t i = 0; i < m; ++i) fx[i] *= fy[i];
  plan.inverse(fx, scratch);
  Vector z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = fx[i].real();
  return z;
}

}  // namespace pts
