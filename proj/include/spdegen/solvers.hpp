#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spdegen/grid.hpp"
#include "spdegen/noise.hpp"

namespace spdegen {

enum class Equation { GinzburgLandau, KdV, Wave, NSEVorticity, Phi42 };

std::string to_string(Equation eq);
Equation equation_from_string(const std::string& name);

/// One SPDE's coefficients, domain and resolution. The solver advances
/// `n_steps` steps of size T / n_steps and keeps every `save_stride`-th
/// state starting from the initial one, so a trajectory holds
/// n_steps / save_stride slices at t_n = n * dt.
struct EquationConfig {
  Equation equation = Equation::GinzburgLandau;
  Grid grid = Grid::line(128);
  double T = 0.05;
  std::size_t n_steps = 50;
  std::size_t save_stride = 1;
  double sigma = 1.0;

  // Ginzburg-Landau: du = (Lap u + reaction * u - u^3) dt + sigma dW.
  double gl_reaction = 3.0;
  // KdV: u_t - viscosity u_xx + gamma u_xxx = nonlinearity u u_x + sigma xi.
  double kdv_viscosity = 0.001;
  double kdv_gamma = 0.1;
  double kdv_nonlinearity = 6.0;
  /// Deterministic sub-steps per noise step for the explicit nonlinear part.
  std::size_t kdv_substeps = 20;
  /// Courant number for the nonlinear advection speed |nonlinearity * u|
  /// at the largest retained wavenumber. Each noise step uses at least
  /// enough sub-steps to respect it; 0 keeps the count fixed.
  double kdv_cfl = 1.0;
  // NSE vorticity.
  double nse_nu = 1e-4;
  double nse_forcing = 0.1;
  /// Subtract the mean of a non-zero-mean initial vorticity instead of
  /// rejecting it.
  bool nse_project_mean = false;
  /// Scales the nonlinear terms of KdV and the wave equation; 0 gives the
  /// linear problem.
  double nonlinear_scale = 1.0;
  /// |u| above this bound is treated as divergence.
  double divergence_bound = 1e6;

  double dt() const { return T / static_cast<double>(n_steps); }
  std::size_t n_saved() const {
    return (n_steps + save_stride - 1) / save_stride;
  }
  /// Structural checks plus the per-scheme stability gates.
  void validate() const;

  static EquationConfig preset(Equation eq);
};

/// Raises DivergenceError if any value is non-finite or exceeds `bound`.
void check_finite(std::span<const double> values, std::size_t step,
                  double bound, const char* what);

Trajectory solve_ginzburg_landau(const Field& u0, const NoisePath& noise,
                                 const EquationConfig& cfg);
Trajectory solve_kdv(const Field& u0, const NoisePath& noise,
                     const EquationConfig& cfg);
Trajectory solve_wave(const Field& u0, const Field& v0, const NoisePath& noise,
                      const EquationConfig& cfg);
Trajectory solve_nse_vorticity(const Field& w0, const NoisePath& noise,
                               const EquationConfig& cfg);
Trajectory solve_phi42_explicit(const Field& u0, const NoisePath& noise,
                                const EquationConfig& cfg);

/// Backward-Euler solve of (I - c D2) u = rhs on a periodic 1D grid, with
/// D2 the three-point second difference scaled by 1/dx^2 and c = dt.
class PeriodicImplicitDiffusion {
 public:
  PeriodicImplicitDiffusion(std::size_t n, double dt_over_dx2);
  void solve(std::span<double> rhs_in_solution_out) const;

 private:
  std::size_t n_;
  double off_;   // off-diagonal
  double diag_;
  std::vector<double> c_prime_;  // Thomas forward sweep factors
  std::vector<double> denom_;
  std::vector<double> z_;        // Sherman-Morrison correction vector
  double gamma_;
  double factor_;
};

/// Periodic five-point Laplacian (2D) or three-point second difference (1D).
void periodic_laplacian(const Grid& grid, std::span<const double> u,
                        std::span<double> out);

}  // namespace spdegen
