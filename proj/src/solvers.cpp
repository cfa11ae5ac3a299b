#include "spdegen/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spdegen/error.hpp"
#include "spdegen/fft.hpp"

namespace spdegen {

namespace {

constexpr double kPi = std::numbers::pi;

void check_noise(const NoisePath& noise, const EquationConfig& cfg,
                 const Field& u0) {
  if (!(u0.grid == cfg.grid))
    throw InvalidArgument("solver: initial field grid does not match config");
  if (!(noise.grid == cfg.grid))
    throw InvalidArgument("solver: noise grid does not match solver grid");
  if (noise.n_steps != cfg.n_steps)
    throw InvalidArgument("solver: noise has " + std::to_string(noise.n_steps) +
                          " steps, solver needs " + std::to_string(cfg.n_steps));
  if (std::abs(noise.dt - cfg.dt()) > 1e-12 * cfg.dt())
    throw InvalidArgument("solver: noise dt differs from solver dt");
}

Trajectory make_trajectory(const EquationConfig& cfg) {
  Trajectory traj(cfg.grid, cfg.n_saved());
  for (std::size_t s = 0; s < traj.n_slices(); ++s)
    traj.times[s] = static_cast<double>(s * cfg.save_stride) * cfg.dt();
  return traj;
}

void store(Trajectory& traj, const EquationConfig& cfg, std::size_t step,
           std::span<const double> u) {
  if (step % cfg.save_stride != 0) return;
  auto dst = traj.slice(step / cfg.save_stride);
  std::copy(u.begin(), u.end(), dst.begin());
}

// Wavenumber 2 pi k / L of FFT index i.
double angular(std::size_t i, std::size_t n, double length) {
  return 2.0 * kPi * static_cast<double>(signed_wavenumber(i, n)) / length;
}

bool inside_two_thirds(std::size_t i, std::size_t n) {
  return 3 * std::abs(signed_wavenumber(i, n)) <= static_cast<long>(n);
}

}  // namespace

std::string to_string(Equation eq) {
  switch (eq) {
    case Equation::GinzburgLandau: return "ginzburg-landau";
    case Equation::KdV: return "kdv";
    case Equation::Wave: return "wave";
    case Equation::NSEVorticity: return "nse-vorticity";
    case Equation::Phi42: return "phi42";
  }
  return "unknown";
}

Equation equation_from_string(const std::string& name) {
  if (name == "ginzburg-landau") return Equation::GinzburgLandau;
  if (name == "kdv") return Equation::KdV;
  if (name == "wave") return Equation::Wave;
  if (name == "nse-vorticity") return Equation::NSEVorticity;
  if (name == "phi42" || name == "phi42-explicit" || name == "phi42-renormalized")
    return Equation::Phi42;
  throw InvalidArgument("unknown equation: " + name);
}

EquationConfig EquationConfig::preset(Equation eq) {
  EquationConfig c;
  c.equation = eq;
  switch (eq) {
    case Equation::GinzburgLandau:
      c.grid = Grid::line(128);
      c.T = 0.05;
      c.n_steps = 50;
      c.sigma = 1.0;
      break;
    case Equation::KdV:
      c.grid = Grid::line(128);
      c.T = 0.5;
      c.n_steps = 50;
      c.sigma = 0.5;
      c.kdv_substeps = 50;
      break;
    case Equation::Wave:
      c.grid = Grid::line(128);
      c.T = 0.5;
      c.n_steps = 500;
      c.save_stride = 5;
      c.sigma = 1.0;
      break;
    case Equation::NSEVorticity:
      c.grid = Grid::square(64);
      c.T = 1.0;
      c.n_steps = 1000;
      c.save_stride = 10;
      c.sigma = 0.005;
      break;
    case Equation::Phi42:
      c.grid = Grid::square(32);
      c.T = 0.025;
      c.n_steps = 250;
      c.sigma = 0.1;
      break;
  }
  return c;
}

void EquationConfig::validate() const {
  if (!(T > 0.0)) throw InvalidArgument("config: T must be positive");
  if (n_steps < 1) throw InvalidArgument("config: n_steps must be >= 1");
  if (save_stride < 1 || n_steps % save_stride != 0)
    throw InvalidArgument("config: save_stride must divide n_steps");
  if (grid.nx < 8 || (grid.two_d && grid.ny < 8))
    throw InvalidArgument("config: spatial resolution must be >= 8");
  if (!(sigma >= 0.0)) throw InvalidArgument("config: sigma must be >= 0");
  const bool needs_2d =
      equation == Equation::NSEVorticity || equation == Equation::Phi42;
  if (needs_2d != grid.two_d)
    throw InvalidArgument("config: grid dimension does not match equation");
  const double h = dt();
  switch (equation) {
    case Equation::Phi42: {
      const double ratio = h / (grid.dx() * grid.dx()) + h / (grid.dy() * grid.dy());
      if (!(ratio < 0.5))
        throw InvalidArgument("config: explicit Phi42 step violates dt/dx^2 < 1/4");
      break;
    }
    case Equation::Wave:
      if (!(h / grid.dx() <= 1.0))
        throw InvalidArgument("config: wave step violates CFL dt/dx <= 1");
      break;
    case Equation::NSEVorticity:
      if (grid.nx != grid.ny)
        throw InvalidArgument("config: NSE grid must be square");
      break;
    case Equation::KdV:
      if (kdv_substeps < 1)
        throw InvalidArgument("config: kdv_substeps must be >= 1");
      if (!std::isfinite(kdv_cfl) || kdv_cfl < 0.0)
        throw InvalidArgument("config: kdv_cfl must be finite and >= 0");
      break;
    case Equation::GinzburgLandau:
      break;
  }
}

void check_finite(std::span<const double> values, std::size_t step,
                  double bound, const char* what) {
  for (double v : values)
    if (!std::isfinite(v) || std::abs(v) > bound)
      throw DivergenceError(std::string(what) + ": solution diverged", step);
}

void periodic_laplacian(const Grid& grid, std::span<const double> u,
                        std::span<double> out) {
  const std::size_t nx = grid.nx, ny = grid.ny;
  const double ix2 = 1.0 / (grid.dx() * grid.dx());
  if (!grid.two_d) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t l = (i + nx - 1) % nx, r = (i + 1) % nx;
      out[i] = (u[l] - 2.0 * u[i] + u[r]) * ix2;
    }
    return;
  }
  const double iy2 = 1.0 / (grid.dy() * grid.dy());
  for (std::size_t i = 0; i < nx; ++i) {
    const std::size_t il = (i + nx - 1) % nx, ir = (i + 1) % nx;
    for (std::size_t j = 0; j < ny; ++j) {
      const std::size_t jl = (j + ny - 1) % ny, jr = (j + 1) % ny;
      const double c = u[i * ny + j];
      out[i * ny + j] = (u[il * ny + j] - 2.0 * c + u[ir * ny + j]) * ix2 +
                        (u[i * ny + jl] - 2.0 * c + u[i * ny + jr]) * iy2;
    }
  }
}

PeriodicImplicitDiffusion::PeriodicImplicitDiffusion(std::size_t n,
                                                     double dt_over_dx2)
    : n_(n), off_(-dt_over_dx2), diag_(1.0 + 2.0 * dt_over_dx2) {
  if (n < 3) throw InvalidArgument("implicit diffusion: need n >= 3");
  // Cyclic system A = T + u v^T with u = (gamma, 0.., off), v = (1, 0.., off/gamma).
  gamma_ = -diag_;
  std::vector<double> b(n, diag_);
  b[0] = diag_ - gamma_;
  b[n - 1] = diag_ - off_ * off_ / gamma_;
  c_prime_.assign(n, 0.0);
  denom_.assign(n, 0.0);
  denom_[0] = b[0];
  c_prime_[0] = off_ / denom_[0];
  for (std::size_t i = 1; i < n; ++i) {
    denom_[i] = b[i] - off_ * c_prime_[i - 1];
    c_prime_[i] = off_ / denom_[i];
  }
  std::vector<double> u(n, 0.0);
  u[0] = gamma_;
  u[n - 1] = off_;
  z_ = u;
  // Thomas solve T z = u.
  z_[0] = z_[0] / denom_[0];
  for (std::size_t i = 1; i < n; ++i)
    z_[i] = (z_[i] - off_ * z_[i - 1]) / denom_[i];
  for (std::size_t i = n - 1; i-- > 0;) z_[i] -= c_prime_[i] * z_[i + 1];
  factor_ = 1.0 + z_[0] + off_ * z_[n - 1] / gamma_;
}

void PeriodicImplicitDiffusion::solve(std::span<double> y) const {
  const std::size_t n = n_;
  y[0] = y[0] / denom_[0];
  for (std::size_t i = 1; i < n; ++i) y[i] = (y[i] - off_ * y[i - 1]) / denom_[i];
  for (std::size_t i = n - 1; i-- > 0;) y[i] -= c_prime_[i] * y[i + 1];
  const double coeff = (y[0] + off_ * y[n - 1] / gamma_) / factor_;
  for (std::size_t i = 0; i < n; ++i) y[i] -= coeff * z_[i];
}

Trajectory solve_ginzburg_landau(const Field& u0, const NoisePath& noise,
                                 const EquationConfig& cfg) {
  cfg.validate();
  check_noise(noise, cfg, u0);
  const std::size_t n = cfg.grid.nx;
  const double dt = cfg.dt();
  const PeriodicImplicitDiffusion implicit(n, dt / (cfg.grid.dx() * cfg.grid.dx()));

  Trajectory traj = make_trajectory(cfg);
  traj.noise_seed = noise.seed;
  std::vector<double> u = u0.values;
  store(traj, cfg, 0, u);
  for (std::size_t step = 1; step < cfg.n_steps; ++step) {
    const auto dw = noise.slice(step - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = u[i];
      u[i] = v + dt * (cfg.gl_reaction * v - v * v * v) + cfg.sigma * dw[i];
    }
    implicit.solve(u);
    check_finite(u, step, cfg.divergence_bound, "ginzburg-landau");
    store(traj, cfg, step, u);
  }
  return traj;
}

Trajectory solve_kdv(const Field& u0, const NoisePath& noise,
                     const EquationConfig& cfg) {
  cfg.validate();
  check_noise(noise, cfg, u0);
  const std::size_t n = cfg.grid.nx;
  const std::size_t m = n / 2 + 1;

  std::vector<Complex> lin(m), e_half(m), e_full(m), deriv(m);
  std::vector<double> mask(m);
  double k_max = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double k = angular(i, n, cfg.grid.lx);
    lin[i] = Complex(-cfg.kdv_viscosity * k * k, cfg.kdv_gamma * k * k * k);
    // Nyquist derivative is dropped; the mask removes it in any case.
    deriv[i] = (2 * i == n) ? Complex(0.0, 0.0) : Complex(0.0, k);
    mask[i] = inside_two_thirds(i, n) ? 1.0 : 0.0;
    if (mask[i] != 0.0) k_max = std::max(k_max, std::abs(k));
  }
  const double coeff = 0.5 * cfg.kdv_nonlinearity * cfg.nonlinear_scale;

  double h = 0.0;
  std::size_t substeps = 0;
  auto set_substeps = [&](std::size_t count) {
    if (count == substeps) return;
    substeps = count;
    h = cfg.dt() / static_cast<double>(count);
    for (std::size_t i = 0; i < m; ++i) {
      e_half[i] = std::exp(lin[i] * (h / 2.0));
      e_full[i] = std::exp(lin[i] * h);
    }
  };
  // The advection speed of nonlinearity * u u_x is |nonlinearity * u|.
  auto substeps_for = [&](double amplitude) {
    std::size_t count = cfg.kdv_substeps;
    if (cfg.kdv_cfl > 0.0 && coeff != 0.0) {
      const double need =
          std::ceil(2.0 * std::abs(coeff) * amplitude * k_max * cfg.dt() / cfg.kdv_cfl);
      if (need > static_cast<double>(count)) count = static_cast<std::size_t>(need);
    }
    return count;
  };
  auto max_abs = [](std::span<const double> u) {
    double a = 0.0;
    for (double x : u) a = std::max(a, std::abs(x));
    return a;
  };

  RealFft1D fft(n);
  std::vector<double> phys(n);
  std::vector<Complex> tmp(m);
  // Dealiased transform of (nonlinearity/2) d/dx (u^2).
  auto nonlinear = [&](const std::vector<Complex>& v, std::vector<Complex>& out) {
    for (std::size_t i = 0; i < m; ++i) tmp[i] = v[i] * mask[i];
    fft.inverse(tmp, phys);
    for (double& p : phys) p *= p;
    fft.forward(phys, out);
    for (std::size_t i = 0; i < m; ++i) out[i] *= coeff * deriv[i] * mask[i] * h;
  };

  std::vector<Complex> v(m), a(m), b(m), c(m), d(m), stage(m), noise_hat(m);
  fft.forward(u0.values, v);

  Trajectory traj = make_trajectory(cfg);
  traj.noise_seed = noise.seed;
  store(traj, cfg, 0, u0.values);
  double amplitude = max_abs(u0.values);
  for (std::size_t step = 1; step < cfg.n_steps; ++step) {
    set_substeps(substeps_for(amplitude));
    if (cfg.nonlinear_scale == 0.0) {
      for (std::size_t s = 0; s < substeps; ++s)
        for (std::size_t i = 0; i < m; ++i) v[i] *= e_full[i];
    } else {
      for (std::size_t s = 0; s < substeps; ++s) {
        nonlinear(v, a);
        for (std::size_t i = 0; i < m; ++i) stage[i] = e_half[i] * (v[i] + 0.5 * a[i]);
        nonlinear(stage, b);
        for (std::size_t i = 0; i < m; ++i) stage[i] = e_half[i] * v[i] + 0.5 * b[i];
        nonlinear(stage, c);
        for (std::size_t i = 0; i < m; ++i) stage[i] = e_full[i] * v[i] + e_half[i] * c[i];
        nonlinear(stage, d);
        for (std::size_t i = 0; i < m; ++i)
          v[i] = e_full[i] * v[i] +
                 (e_full[i] * a[i] + 2.0 * e_half[i] * (b[i] + c[i]) + d[i]) / 6.0;
      }
    }
    if (cfg.sigma != 0.0) {
      fft.forward(noise.slice(step - 1), noise_hat);
      for (std::size_t i = 0; i < m; ++i) v[i] += cfg.sigma * noise_hat[i];
    }
    fft.inverse(v, phys);
    check_finite(phys, step, cfg.divergence_bound, "kdv");
    store(traj, cfg, step, phys);
    amplitude = max_abs(phys);
  }
  return traj;
}

Trajectory solve_wave(const Field& u0, const Field& v0, const NoisePath& noise,
                      const EquationConfig& cfg) {
  cfg.validate();
  check_noise(noise, cfg, u0);
  if (!(v0.grid == cfg.grid))
    throw InvalidArgument("wave: initial velocity grid does not match config");
  const std::size_t n = cfg.grid.nx;
  const double dt = cfg.dt();
  const double s = cfg.nonlinear_scale;
  auto source = [s](double u) { return s * (std::cos(kPi * u) + u * u); };

  Trajectory traj = make_trajectory(cfg);
  traj.noise_seed = noise.seed;
  std::vector<double> prev = u0.values, cur(n), next(n), lap(n);
  store(traj, cfg, 0, prev);
  if (cfg.n_steps == 1) return traj;

  periodic_laplacian(cfg.grid, prev, lap);
  {
    const auto dw = noise.slice(0);
    for (std::size_t i = 0; i < n; ++i)
      cur[i] = prev[i] + dt * v0.values[i] +
               0.5 * dt * dt * (lap[i] + source(prev[i])) +
               0.5 * dt * cfg.sigma * prev[i] * dw[i];
  }
  check_finite(cur, 1, cfg.divergence_bound, "wave");
  store(traj, cfg, 1, cur);
  for (std::size_t step = 2; step < cfg.n_steps; ++step) {
    const auto dw = noise.slice(step - 1);
    periodic_laplacian(cfg.grid, cur, lap);
    for (std::size_t i = 0; i < n; ++i)
      next[i] = 2.0 * cur[i] - prev[i] + dt * dt * (lap[i] + source(cur[i])) +
                dt * cfg.sigma * cur[i] * dw[i];
    check_finite(next, step, cfg.divergence_bound, "wave");
    store(traj, cfg, step, next);
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return traj;
}

Trajectory solve_nse_vorticity(const Field& w0, const NoisePath& noise,
                               const EquationConfig& cfg) {
  cfg.validate();
  check_noise(noise, cfg, w0);
  const std::size_t n = cfg.grid.nx;
  const std::size_t pts = n * n;
  const double dt = cfg.dt();

  std::vector<double> w = w0.values;
  double mean = 0.0, peak = 0.0;
  for (double v : w) {
    mean += v;
    peak = std::max(peak, std::abs(v));
  }
  mean /= static_cast<double>(pts);
  if (std::abs(mean) > 1e-10 * (1.0 + peak)) {
    if (!cfg.nse_project_mean)
      throw InvalidArgument("nse: initial vorticity must have zero mean");
    for (double& v : w) v -= mean;
  }

  std::vector<double> kx(pts), ky(pts), k2(pts), mask(pts), cn_num(pts), cn_den(pts);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      const std::size_t i = p * n + q;
      kx[i] = angular(p, n, cfg.grid.lx);
      ky[i] = angular(q, n, cfg.grid.ly);
      k2[i] = kx[i] * kx[i] + ky[i] * ky[i];
      mask[i] = (inside_two_thirds(p, n) && inside_two_thirds(q, n)) ? 1.0 : 0.0;
      cn_num[i] = 1.0 - 0.5 * dt * cfg.nse_nu * k2[i];
      cn_den[i] = 1.0 + 0.5 * dt * cfg.nse_nu * k2[i];
    }

  Fft2D fft(n, n);
  std::vector<Complex> w_hat(pts), forcing_hat(pts), tmp(pts), ux_hat(pts),
      uy_hat(pts), flux_x(pts), flux_y(pts), rhs(pts), rhs_prev(pts),
      noise_hat(pts);
  std::vector<double> ux(pts), uy(pts), wp(pts), prod(pts);
  fft.forward_real(w, w_hat);
  w_hat[0] = 0.0;
  {
    std::vector<double> f(pts);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double s = 2.0 * kPi * (cfg.grid.x(i) + cfg.grid.y(j));
        f[i * n + j] = cfg.nse_forcing * (std::sin(s) + std::cos(s));
      }
    fft.forward_real(f, forcing_hat);
  }

  // Transform of -div(u w) + f with u = (d_y psi, -d_x psi), -Lap psi = w.
  auto tendency = [&](std::vector<Complex>& out) {
    for (std::size_t i = 0; i < pts; ++i) {
      const Complex psi = (k2[i] > 0.0) ? w_hat[i] / k2[i] : Complex(0.0, 0.0);
      ux_hat[i] = Complex(0.0, ky[i]) * psi;
      uy_hat[i] = Complex(0.0, -kx[i]) * psi;
    }
    fft.inverse_real(ux_hat, ux);
    fft.inverse_real(uy_hat, uy);
    fft.inverse_real(w_hat, wp);
    for (std::size_t i = 0; i < pts; ++i) prod[i] = ux[i] * wp[i];
    fft.forward_real(prod, flux_x);
    for (std::size_t i = 0; i < pts; ++i) prod[i] = uy[i] * wp[i];
    fft.forward_real(prod, flux_y);
    for (std::size_t i = 0; i < pts; ++i) {
      const Complex div = Complex(0.0, kx[i]) * flux_x[i] + Complex(0.0, ky[i]) * flux_y[i];
      out[i] = -mask[i] * div + forcing_hat[i];
    }
  };

  Trajectory traj = make_trajectory(cfg);
  traj.noise_seed = noise.seed;
  store(traj, cfg, 0, w);
  std::vector<double> phys(pts);
  for (std::size_t step = 1; step < cfg.n_steps; ++step) {
    tendency(rhs);
    if (step == 1) rhs_prev = rhs;
    for (std::size_t i = 0; i < pts; ++i)
      w_hat[i] = (cn_num[i] * w_hat[i] + dt * (1.5 * rhs[i] - 0.5 * rhs_prev[i])) /
                 cn_den[i];
    if (cfg.sigma != 0.0) {
      fft.forward_real(noise.slice(step - 1), noise_hat);
      for (std::size_t i = 0; i < pts; ++i) w_hat[i] += cfg.sigma * noise_hat[i];
    }
    w_hat[0] = 0.0;
    std::swap(rhs_prev, rhs);
    fft.inverse_real(w_hat, phys);
    check_finite(phys, step, cfg.divergence_bound, "nse");
    store(traj, cfg, step, phys);
  }
  return traj;
}

Trajectory solve_phi42_explicit(const Field& u0, const NoisePath& noise,
                                const EquationConfig& cfg) {
  cfg.validate();
  check_noise(noise, cfg, u0);
  const std::size_t pts = cfg.grid.points();
  const double dt = cfg.dt();
  Trajectory traj = make_trajectory(cfg);
  traj.noise_seed = noise.seed;
  std::vector<double> u = u0.values, lap(pts);
  store(traj, cfg, 0, u);
  for (std::size_t step = 1; step < cfg.n_steps; ++step) {
    const auto dw = noise.slice(step - 1);
    periodic_laplacian(cfg.grid, u, lap);
    for (std::size_t i = 0; i < pts; ++i) {
      const double v = u[i];
      u[i] = v + dt * (lap[i] - v * v * v) + cfg.sigma * dw[i];
    }
    check_finite(u, step, cfg.divergence_bound, "phi42");
    store(traj, cfg, step, u);
  }
  return traj;
}

}  // namespace spdegen
