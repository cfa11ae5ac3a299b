#pragma once

#include <utility>
#include <vector>

#include "spdegen/grid.hpp"
#include "spdegen/noise.hpp"
#include "spdegen/solvers.hpp"

namespace spdegen {

/// Stochastic convolution dX = Lap X dt + sigma dW^J, X(0) = u0, on the
/// Phi42 grid. The driven part is advanced mode by mode with the exact
/// Ornstein-Uhlenbeck transition of the sine-Galerkin truncation, using the
/// same per-mode Brownian increments as sample_path() for the noise seed.
/// The deterministic part (heat flow of u0) is advanced with the explicit
/// five-point scheme of solve_phi42_explicit().
Trajectory stochastic_convolution(const Field& u0, const NoisePath& noise,
                                  const EquationConfig& cfg);

/// a(t, x) = sigma^2 sum_{j,k<=J} phi_jk(x)^2 (1 - exp(-2 lambda_jk t)) / (2 lambda_jk),
/// lambda_jk = pi^2 (j^2/Lx^2 + k^2/Ly^2): the variance of the zero-initial
/// driven part of the stochastic convolution.
Field renorm_constant(int J, double t, const EquationConfig& cfg);

/// Spatial mean of renorm_constant() over the grid.
double renorm_constant_mean(int J, double t, const EquationConfig& cfg);

/// renorm_constant() at every solver time t_n = n dt, n = 0..n_steps-1.
Trajectory renorm_constant_series(int J, const EquationConfig& cfg);

/// X2 = X^2 - a and X3 = X^3 - 3 a X, pointwise.
std::pair<Trajectory, Trajectory> wick_powers(const Trajectory& x,
                                              const Trajectory& a);

/// Semi-implicit step of dv = (Lap v - (v^3 + 3 v^2 X + 3 v X2 + X3)) dt,
/// v(0) = 0. Inputs hold every solver step (save_stride 1).
Trajectory solve_shift(const Trajectory& x, const Trajectory& x2,
                       const Trajectory& x3, const EquationConfig& cfg);

struct RenormBundle {
  int J = 0;
  Trajectory x;
  Trajectory a;
  std::vector<double> a_mean;
  Trajectory x2;
  Trajectory x3;
  Trajectory v;
  Trajectory u;
};

/// Full renormalised pipeline; every trajectory is subsampled with
/// cfg.save_stride. `a_series`, if given, must equal
/// renorm_constant_series(J, cfg) and saves recomputing it per sample.
RenormBundle renormalized_bundle(const Field& u0, const NoisePath& noise,
                                 const EquationConfig& cfg,
                                 const Trajectory* a_series = nullptr);

/// u = X + v for the renormalised dynamical Phi42 model.
Trajectory solve_phi42_renormalized(const Field& u0, const NoisePath& noise,
                                    const EquationConfig& cfg);

}  // namespace spdegen
