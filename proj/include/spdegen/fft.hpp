#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spdegen {

using Complex = std::complex<double>;

/// Real 1D transform of length n. forward() returns the n/2+1 non-negative
/// modes unnormalised; inverse() applies the 1/n factor. Plans use
/// FFTW_ESTIMATE so results are reproducible run to run. Instances own
/// their buffers and must not be shared between threads.
class RealFft1D {
 public:
  explicit RealFft1D(std::size_t n);
  ~RealFft1D();
  RealFft1D(const RealFft1D&) = delete;
  RealFft1D& operator=(const RealFft1D&) = delete;

  std::size_t size() const { return n_; }
  std::size_t modes() const { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<Complex> out);
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_;
  void* spec_;
  void* plan_fwd_;
  void* plan_inv_;
};

/// Complex 2D transform on an nx-by-ny array (x outermost). forward() is
/// unnormalised; inverse() applies 1/(nx*ny).
class Fft2D {
 public:
  Fft2D(std::size_t nx, std::size_t ny);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  void forward(std::span<const Complex> in, std::span<Complex> out);
  void forward_real(std::span<const double> in, std::span<Complex> out);
  void inverse(std::span<const Complex> in, std::span<Complex> out);
  /// Inverse transform keeping only the real part.
  void inverse_real(std::span<const Complex> in, std::span<double> out);

 private:
  std::size_t nx_, ny_;
  void* buf_in_;
  void* buf_out_;
  void* plan_fwd_;
  void* plan_inv_;
};

/// Signed integer wavenumber of FFT index i on an n-point grid:
/// 0..n/2 map to themselves, the rest to i - n.
inline long signed_wavenumber(std::size_t i, std::size_t n) {
  const long k = static_cast<long>(i);
  return (i <= n / 2) ? k : k - static_cast<long>(n);
}

}  // namespace spdegen
