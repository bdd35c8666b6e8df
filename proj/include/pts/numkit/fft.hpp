#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pts/numkit/matrix.hpp"

namespace pts {

/// Complex vector stored as separate real and imaginary arrays.
struct ComplexVector {
  std::vector<double> re;
  std::vector<double> im;

  ComplexVector() = default;
  explicit ComplexVector(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
  ComplexVector(std::vector<double> real, std::vector<double> imag);

  std::size_t size() const noexcept { return re.size(); }
};

/// Precomputed DFT of a fixed length.
///
/// Power-of-two lengths use an iterative radix-2 transform. Any other length
/// goes through Bluestein's chirp-z algorithm on a power-of-two core, so the
/// transform length is exactly n (no padding of the signal itself).
/// A plan is immutable; the scratch buffer is supplied by the caller.
class FftPlan {
 public:
  using cd = std::complex<double>;

  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  /// Unnormalized forward DFT, in place.
  void forward(std::span<cd> x, std::vector<cd>& scratch) const;
  /// Inverse DFT including the 1/n factor, in place.
  void inverse(std::span<cd> x, std::vector<cd>& scratch) const;

  void forward(std::span<cd> x) const;
  void inverse(std::span<cd> x) const;

 private:
  struct Radix2 {
    std::size_t n = 0;
    std::vector<std::size_t> bitrev;
    std::vector<cd> twiddle;  // exp(-2 pi i k / n), k < n/2
    void init(std::size_t len);
    void run(std::span<cd> x, bool inverse) const;  // unnormalized
  };

  std::size_t n_;
  bool pow2_;
  Radix2 core_;
  std::vector<cd> chirp_;        // exp(-i pi k^2 / n)
  std::vector<cd> chirp_fft_;    // FFT of the conjugate chirp filter, length core_.n
};

ComplexVector fft_forward(const ComplexVector& x);
ComplexVector fft_inverse(const ComplexVector& x);

/// z[j] = sum over a + b = j (mod m) of x[a] * y[b], via FFT.
Vector circular_convolve(std::span<const double> x, std::span<const double> y);

}  // namespace pts
