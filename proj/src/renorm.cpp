#include "spdegen/renorm.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "spdegen/error.hpp"
#include "spdegen/fft.hpp"

namespace spdegen {

namespace {

constexpr double kPi = std::numbers::pi;

EquationConfig unstrided(const EquationConfig& cfg) {
  EquationConfig c = cfg;
  c.save_stride = 1;
  return c;
}

Eigen::MatrixXd sine_matrix(int modes, const Grid& grid, bool along_y) {
  const std::size_t n = along_y ? grid.ny : grid.nx;
  const double length = along_y ? grid.ly : grid.lx;
  Eigen::MatrixXd m(modes, static_cast<Eigen::Index>(n));
  const double norm = std::sqrt(2.0 / length);
  for (int j = 1; j <= modes; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double x = length * static_cast<double>(i) / static_cast<double>(n);
      m(j - 1, static_cast<Eigen::Index>(i)) = norm * std::sin(j * kPi * x / length);
    }
  return m;
}

double galerkin_eigenvalue(int j, int k, const Grid& grid) {
  return kPi * kPi *
         (j * j / (grid.lx * grid.lx) + k * k / (grid.ly * grid.ly));
}

// Writes px^T coeff py into a grid slice (x outermost).
void synthesise(const Eigen::MatrixXd& px, const Eigen::MatrixXd& coeff,
                const Eigen::MatrixXd& py, const Grid& grid,
                std::span<double> out) {
  Eigen::Map<Eigen::MatrixXd> dst(out.data(), static_cast<Eigen::Index>(grid.ny),
                                  static_cast<Eigen::Index>(grid.nx));
  dst.noalias() = py.transpose() * coeff.transpose() * px;
}

void check_renorm_inputs(const Field& u0, const NoisePath& noise,
                         const EquationConfig& cfg) {
  if (cfg.equation != Equation::Phi42)
    throw InvalidArgument("renorm: config is not a Phi42 config");
  cfg.validate();
  if (noise.basis.kind != BasisKind::Sine2D ||
      noise.spectrum.kind != SpectrumKind::Identity)
    throw InvalidArgument("renorm: noise must be cylindrical on the Sine2D basis");
  if (noise.basis.lx != cfg.grid.lx || noise.basis.ly != cfg.grid.ly)
    throw InvalidArgument("renorm: noise basis domain does not match grid");
  if (noise.n_trajectories != 1)
    throw InvalidArgument("renorm: noise must be a single trajectory");
  if (!(noise.grid == cfg.grid) || !(u0.grid == cfg.grid))
    throw InvalidArgument("renorm: grid mismatch");
  if (noise.n_steps != cfg.n_steps ||
      std::abs(noise.dt - cfg.dt()) > 1e-12 * cfg.dt())
    throw InvalidArgument("renorm: noise time grid does not match solver");
}

Trajectory subsample(const Trajectory& full, std::size_t stride) {
  if (stride == 1) return full;
  const std::size_t n = (full.n_slices() + stride - 1) / stride;
  Trajectory out(full.grid, n);
  out.noise_seed = full.noise_seed;
  for (std::size_t s = 0; s < n; ++s) {
    out.times[s] = full.times[s * stride];
    auto src = full.slice(s * stride);
    std::copy(src.begin(), src.end(), out.slice(s).begin());
  }
  return out;
}

// Stochastic convolution at every solver step.
Trajectory convolution_all_steps(const Field& u0, const NoisePath& noise,
                                 const EquationConfig& cfg) {
  check_renorm_inputs(u0, noise, cfg);
  const Grid& grid = cfg.grid;
  const std::size_t pts = grid.points();
  const double dt = cfg.dt();
  const int jx = noise.basis.jx, jy = noise.basis.jy;

  const Eigen::MatrixXd px = sine_matrix(jx, grid, false);
  const Eigen::MatrixXd py = sine_matrix(jy, grid, true);
  Eigen::MatrixXd decay(jx, jy), gain(jx, jy);
  for (int j = 0; j < jx; ++j)
    for (int k = 0; k < jy; ++k) {
      const double lam = galerkin_eigenvalue(j + 1, k + 1, grid);
      decay(j, k) = std::exp(-lam * dt);
      // Scales an N(0, dt) increment to the exact OU innovation variance.
      gain(j, k) = cfg.sigma * std::sqrt(-std::expm1(-2.0 * lam * dt) / (2.0 * lam * dt));
    }

  const ModeSampler sampler(noise.basis, noise.seed, noise.dt);
  Trajectory x(grid, cfg.n_steps);
  x.noise_seed = noise.seed;
  std::vector<double> heat = u0.values, lap(pts), driven(pts);
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(jx, jy);
  for (std::size_t step = 0; step < cfg.n_steps; ++step) {
    if (step > 0) {
      periodic_laplacian(grid, heat, lap);
      for (std::size_t i = 0; i < pts; ++i) heat[i] += dt * lap[i];
      if (cfg.sigma != 0.0)
        coeff = decay.cwiseProduct(coeff) +
                gain.cwiseProduct(sampler.draw_sine(step - 1, 0));
    }
    x.times[step] = static_cast<double>(step) * dt;
    auto out = x.slice(step);
    if (cfg.sigma != 0.0) {
      synthesise(px, coeff, py, grid, driven);
      for (std::size_t i = 0; i < pts; ++i) out[i] = heat[i] + driven[i];
    } else {
      std::copy(heat.begin(), heat.end(), out.begin());
    }
    check_finite(out, step, cfg.divergence_bound, "stochastic convolution");
  }
  return x;
}

}  // namespace

Trajectory stochastic_convolution(const Field& u0, const NoisePath& noise,
                                  const EquationConfig& cfg) {
  return subsample(convolution_all_steps(u0, noise, cfg), cfg.save_stride);
}

Trajectory renorm_constant_series(int J, const EquationConfig& cfg) {
  if (J < 1) throw InvalidArgument("renorm_constant: J must be >= 1");
  if (!cfg.grid.two_d) throw InvalidArgument("renorm_constant: needs a 2D grid");
  const Grid& grid = cfg.grid;
  Eigen::MatrixXd sx = sine_matrix(J, grid, false).array().square().matrix();
  Eigen::MatrixXd sy = sine_matrix(J, grid, true).array().square().matrix();
  Eigen::MatrixXd lam(J, J);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < J; ++k) lam(j, k) = galerkin_eigenvalue(j + 1, k + 1, grid);

  const double s2 = cfg.sigma * cfg.sigma;
  Trajectory a(grid, cfg.n_steps);
  for (std::size_t n = 0; n < cfg.n_steps; ++n) {
    const double t = static_cast<double>(n) * cfg.dt();
    a.times[n] = t;
    Eigen::MatrixXd w(J, J);
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < J; ++k)
        w(j, k) = s2 * -std::expm1(-2.0 * lam(j, k) * t) / (2.0 * lam(j, k));
    synthesise(sx, w, sy, grid, a.slice(n));
  }
  return a;
}

Field renorm_constant(int J, double t, const EquationConfig& cfg) {
  if (J < 1) throw InvalidArgument("renorm_constant: J must be >= 1");
  if (!(t >= 0.0)) throw InvalidArgument("renorm_constant: t must be >= 0");
  const Grid& grid = cfg.grid;
  Eigen::MatrixXd sx = sine_matrix(J, grid, false).array().square().matrix();
  Eigen::MatrixXd sy = sine_matrix(J, grid, true).array().square().matrix();
  Eigen::MatrixXd w(J, J);
  const double s2 = cfg.sigma * cfg.sigma;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < J; ++k) {
      const double lam = galerkin_eigenvalue(j + 1, k + 1, grid);
      w(j, k) = s2 * -std::expm1(-2.0 * lam * t) / (2.0 * lam);
    }
  Field a(grid);
  synthesise(sx, w, sy, grid, a.values);
  return a;
}

double renorm_constant_mean(int J, double t, const EquationConfig& cfg) {
  const Field a = renorm_constant(J, t, cfg);
  double s = 0.0;
  for (double v : a.values) s += v;
  return s / static_cast<double>(a.values.size());
}

std::pair<Trajectory, Trajectory> wick_powers(const Trajectory& x,
                                              const Trajectory& a) {
  if (!(x.grid == a.grid) || x.n_slices() != a.n_slices())
    throw InvalidArgument("wick_powers: shape mismatch");
  Trajectory x2 = x, x3 = x;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double xv = x.values[i], av = a.values[i];
    x2.values[i] = xv * xv - av;
    x3.values[i] = xv * xv * xv - 3.0 * av * xv;
  }
  return {std::move(x2), std::move(x3)};
}

Trajectory solve_shift(const Trajectory& x, const Trajectory& x2,
                       const Trajectory& x3, const EquationConfig& cfg) {
  if (!(x.grid == cfg.grid) || !(x2.grid == cfg.grid) || !(x3.grid == cfg.grid) ||
      x.n_slices() != cfg.n_steps || x2.n_slices() != cfg.n_steps ||
      x3.n_slices() != cfg.n_steps)
    throw InvalidArgument("solve_shift: inputs must cover every solver step");
  const Grid& grid = cfg.grid;
  const std::size_t nx = grid.nx, ny = grid.ny, pts = grid.points();
  const double dt = cfg.dt();

  std::vector<double> inv_symbol(pts);
  for (std::size_t p = 0; p < nx; ++p)
    for (std::size_t q = 0; q < ny; ++q) {
      const double sx = std::sin(kPi * static_cast<double>(p) / static_cast<double>(nx));
      const double sy = std::sin(kPi * static_cast<double>(q) / static_cast<double>(ny));
      const double mu = 4.0 * sx * sx / (grid.dx() * grid.dx()) +
                        4.0 * sy * sy / (grid.dy() * grid.dy());
      inv_symbol[p * ny + q] = 1.0 / (1.0 + dt * mu);
    }

  Fft2D fft(nx, ny);
  std::vector<Complex> spec(pts);
  Trajectory v(grid, cfg.n_steps);
  v.times = x.times;
  v.noise_seed = x.noise_seed;
  std::vector<double> cur(pts, 0.0), rhs(pts);
  for (std::size_t step = 1; step < cfg.n_steps; ++step) {
    const auto xs = x.slice(step - 1), x2s = x2.slice(step - 1), x3s = x3.slice(step - 1);
    for (std::size_t i = 0; i < pts; ++i) {
      const double vv = cur[i];
      const double wick_cubic =
          vv * vv * vv + 3.0 * vv * vv * xs[i] + 3.0 * vv * x2s[i] + x3s[i];
      rhs[i] = vv - dt * wick_cubic;
    }
    fft.forward_real(rhs, spec);
    for (std::size_t i = 0; i < pts; ++i) spec[i] *= inv_symbol[i];
    fft.inverse_real(spec, cur);
    check_finite(cur, step, cfg.divergence_bound, "shift equation");
    auto out = v.slice(step);
    std::copy(cur.begin(), cur.end(), out.begin());
  }
  return v;
}

RenormBundle renormalized_bundle(const Field& u0, const NoisePath& noise,
                                 const EquationConfig& cfg,
                                 const Trajectory* a_series) {
  const EquationConfig full = unstrided(cfg);
  RenormBundle b;
  b.J = noise.basis.jx;
  Trajectory x = convolution_all_steps(u0, noise, full);
  Trajectory a;
  if (a_series != nullptr) {
    if (!(a_series->grid == full.grid) || a_series->n_slices() != full.n_steps)
      throw InvalidArgument("renormalized_bundle: a_series shape mismatch");
    a = *a_series;
  } else {
    a = renorm_constant_series(b.J, full);
  }
  auto [x2, x3] = wick_powers(x, a);
  Trajectory v = solve_shift(x, x2, x3, full);
  Trajectory u = x;
  for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] += v.values[i];

  const std::size_t s = cfg.save_stride;
  b.x = subsample(x, s);
  b.a = subsample(a, s);
  b.x2 = subsample(x2, s);
  b.x3 = subsample(x3, s);
  b.v = subsample(v, s);
  b.u = subsample(u, s);
  b.a_mean.reserve(b.a.n_slices());
  for (std::size_t n = 0; n < b.a.n_slices(); ++n) {
    double m = 0.0;
    for (double val : b.a.slice(n)) m += val;
    b.a_mean.push_back(m / static_cast<double>(b.a.grid.points()));
  }
  return b;
}

Trajectory solve_phi42_renormalized(const Field& u0, const NoisePath& noise,
                                    const EquationConfig& cfg) {
  return renormalized_bundle(u0, noise, cfg).u;
}

}  // namespace spdegen
