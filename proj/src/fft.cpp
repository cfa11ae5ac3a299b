#include "spdegen/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "spdegen/error.hpp"

namespace spdegen {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft1D::RealFft1D(std::size_t n) : n_(n) {
  if (n < 2) throw InvalidArgument("RealFft1D: size must be >= 2");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spec_ = spec;
  plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec,
                                   FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real_,
                                   FFTW_ESTIMATE);
}

RealFft1D::~RealFft1D() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft1D::forward(std::span<const double> in, std::span<Complex> out) {
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  const auto* spec = static_cast<const Complex*>(spec_);
  std::copy(spec, spec + modes(), out.begin());
}

void RealFft1D::inverse(std::span<const Complex> in, std::span<double> out) {
  auto* spec = static_cast<Complex*>(spec_);
  std::copy(in.begin(), in.begin() + static_cast<long>(modes()), spec);
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

Fft2D::Fft2D(std::size_t nx, std::size_t ny) : nx_(nx), ny_(ny) {
  if (nx < 2 || ny < 2) throw InvalidArgument("Fft2D: sizes must be >= 2");
  std::lock_guard lock(planner_mutex());
  auto* in = fftw_alloc_complex(nx * ny);
  auto* out = fftw_alloc_complex(nx * ny);
  buf_in_ = in;
  buf_out_ = out;
  plan_fwd_ = fftw_plan_dft_2d(static_cast<int>(nx), static_cast<int>(ny), in,
                               out, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_2d(static_cast<int>(nx), static_cast<int>(ny), in,
                               out, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2D::~Fft2D() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(buf_in_);
  fftw_free(buf_out_);
}

void Fft2D::forward(std::span<const Complex> in, std::span<Complex> out) {
  auto* bin = static_cast<Complex*>(buf_in_);
  std::copy(in.begin(), in.end(), bin);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  const auto* bout = static_cast<const Complex*>(buf_out_);
  std::copy(bout, bout + nx_ * ny_, out.begin());
}

void Fft2D::forward_real(std::span<const double> in, std::span<Complex> out) {
  auto* bin = static_cast<Complex*>(buf_in_);
  for (std::size_t i = 0; i < nx_ * ny_; ++i) bin[i] = Complex(in[i], 0.0);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  const auto* bout = static_cast<const Complex*>(buf_out_);
  std::copy(bout, bout + nx_ * ny_, out.begin());
}

void Fft2D::inverse(std::span<const Complex> in, std::span<Complex> out) {
  auto* bin = static_cast<Complex*>(buf_in_);
  std::copy(in.begin(), in.end(), bin);
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const auto* bout = static_cast<const Complex*>(buf_out_);
  const double scale = 1.0 / static_cast<double>(nx_ * ny_);
  for (std::size_t i = 0; i < nx_ * ny_; ++i) out[i] = bout[i] * scale;
}

void Fft2D::inverse_real(std::span<const Complex> in, std::span<double> out) {
  auto* bin = static_cast<Complex*>(buf_in_);
  std::copy(in.begin(), in.end(), bin);
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const auto* bout = static_cast<const Complex*>(buf_out_);
  const double scale = 1.0 / static_cast<double>(nx_ * ny_);
  for (std::size_t i = 0; i < nx_ * ny_; ++i) out[i] = bout[i].real() * scale;
}

}  // namespace spdegen
