#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spdegen/grid.hpp"

namespace spdegen {

/// Default per-dimension cap on the number of noise modes.
inline constexpr std::size_t kDefaultModeCap = 4096;

enum class BasisKind { Sine1D, Sine2D, ComplexExp2D };

/// Orthonormal basis used to expand the Wiener process.
///
/// Sine1D:       phi_j(x)   = sqrt(2/L) sin(j pi x / L),           j = 1..jx
/// Sine2D:       phi_jk(x,y) = sqrt(4/(Lx Ly)) sin(j pi x/Lx) sin(k pi y/Ly)
/// ComplexExp2D: phi_jk(x,y) = exp(2 pi i (j x/Lx + k y/Ly)) / sqrt(Lx Ly),
///               j in -jx/2+1..jx/2, k in -jy/2+1..jy/2 (jx, jy even)
struct BasisSpec {
  BasisKind kind = BasisKind::Sine1D;
  double lx = 1.0;
  double ly = 1.0;
  int jx = 1;
  int jy = 1;

  static BasisSpec sine_1d(int j, double length = 1.0);
  static BasisSpec sine_2d(int j, double length = 1.0);
  static BasisSpec complex_exp_2d(int j, double length = 1.0);

  bool two_d() const { return kind != BasisKind::Sine1D; }
  std::size_t n_modes() const {
    return static_cast<std::size_t>(jx) * static_cast<std::size_t>(jy);
  }
  /// Throws InvalidArgument for malformed truncations and
  /// ResourceLimitError when a truncation exceeds `mode_cap`.
  void validate(std::size_t mode_cap = kDefaultModeCap) const;

  bool operator==(const BasisSpec&) const = default;
};

enum class SpectrumKind { Identity, PolyDecay1D, GaussDecay2D };

/// Eigenvalues of the covariance operator Q in the chosen basis.
struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::Identity;
  double r = 2.0;
  double eps = 0.001;
  double alpha = 0.005;

  static SpectrumSpec identity() { return {}; }
  static SpectrumSpec poly_decay(double r, double eps) {
    return {SpectrumKind::PolyDecay1D, r, eps, 0.005};
  }
  static SpectrumSpec gauss_decay(double alpha) {
    return {SpectrumKind::GaussDecay2D, 2.0, 0.001, alpha};
  }

  /// Identity: 1. PolyDecay1D: (floor(j/2)+1)^-(2r+1+eps) for j >= 1.
  /// GaussDecay2D: exp(-alpha (j^2 + k^2)).
  double eigenvalue(int j, int k = 0) const;
  void validate() const;

  bool operator==(const SpectrumSpec&) const = default;
};

std::string to_string(BasisKind kind);
std::string to_string(SpectrumKind kind);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Basis functions evaluated at points: one row per real basis function,
/// one column per point.
///
/// Sine bases have one row per mode, ordered (j-1)*jy + (k-1). For
/// ComplexExp2D the real-valued Hermitian-paired form is returned: the
/// first jx*jy rows are cos(theta_jk)/sqrt(A), the next jx*jy rows are
/// sin(theta_jk)/sqrt(A), so that sum_rows lambda * g(x) g(x') is the
/// covariance of the real field per unit time.
Eigen::MatrixXd eval_basis(const BasisSpec& basis, std::span<const Point> points,
                           std::size_t mode_cap = kDefaultModeCap);
Eigen::MatrixXd eval_basis(const BasisSpec& basis, const Grid& grid,
                           std::size_t mode_cap = kDefaultModeCap);

/// lambda for every row of eval_basis(basis, ...).
std::vector<double> basis_row_eigenvalues(const BasisSpec& basis,
                                          const SpectrumSpec& spectrum);

/// Draws the per-mode Brownian increments of a truncated expansion. The
/// stream for mode (j, k), step n and trajectory m depends only on
/// (seed, n, j, k, m), so a smaller truncation sees exactly the low-mode
/// randomness of a larger one.
class ModeSampler {
 public:
  ModeSampler(const BasisSpec& basis, std::uint64_t seed, double dt);

  /// Increments dB ~ N(0, dt) for a sine basis as a jx-by-jy matrix
  /// (jy == 1 in 1D). Not weighted by sqrt(lambda).
  Eigen::MatrixXd draw_sine(std::size_t step, std::uint32_t trajectory) const;

  /// Complex increments for ComplexExp2D as a jx-by-jy matrix indexed by
  /// (j + jx/2 - 1, k + jy/2 - 1). Real and imaginary parts are
  /// independent N(0, dt/2); the (0,0) entry is real N(0, dt). Entries
  /// whose conjugate partner lies inside the truncation are the conjugate
  /// of that partner.
  Eigen::MatrixXcd draw_complex(std::size_t step,
                                std::uint32_t trajectory) const;

  const BasisSpec& basis() const { return basis_; }
  double dt() const { return dt_; }

 private:
  BasisSpec basis_;
  std::uint64_t seed_;
  double dt_;
  double sqrt_dt_;
};

/// Sampled Wiener increments on a space-time grid.
struct NoisePath {
  Grid grid;
  BasisSpec basis;
  SpectrumSpec spectrum;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::size_t n_steps = 0;
  int n_trajectories = 1;
  /// n_steps x grid.points(), step-major.
  std::vector<double> increments;

  std::span<const double> slice(std::size_t n) const {
    return {increments.data() + n * grid.points(), grid.points()};
  }
  /// W(t_n) for n = 0..n_steps as prefix sums of the increments, W(0) = 0.
  std::vector<double> path_values() const;
};

/// dW[n][m] = sum_trajectories sum_modes sqrt(lambda) phi(x_m) dB_{mode,n}.
NoisePath sample_path(const BasisSpec& basis, const SpectrumSpec& spectrum,
                      std::size_t n_steps, double dt, const Grid& grid,
                      std::uint64_t seed, int n_trajectories = 1,
                      std::size_t mode_cap = kDefaultModeCap);

/// xi[n][m] = increments[n][m] / dt.
std::vector<double> increments_to_white_noise(const NoisePath& path);

/// Pointwise variance per unit time of the sampled field at (x, y):
/// sum over modes of lambda * |phi|^2 (times n_trajectories).
double pointwise_variance_rate(const BasisSpec& basis,
                               const SpectrumSpec& spectrum, Point p,
                               int n_trajectories = 1);

}  // namespace spdegen
