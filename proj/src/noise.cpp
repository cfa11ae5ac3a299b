#include "spdegen/noise.hpp"

#include <cmath>
#include <numbers>

#include "spdegen/error.hpp"
#include "spdegen/fft.hpp"
#include "spdegen/rng.hpp"

namespace spdegen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint32_t kLineTag = 0xFFFFFFFFu;

// sqrt(2/L) sin(j pi x / L) for j = 1..modes, one row per mode.
Eigen::MatrixXd sine_rows(int modes, double length,
                          const std::vector<double>& coords) {
  Eigen::MatrixXd m(modes, static_cast<Eigen::Index>(coords.size()));
  const double norm = std::sqrt(2.0 / length);
  for (int j = 1; j <= modes; ++j)
    for (std::size_t c = 0; c < coords.size(); ++c)
      m(j - 1, static_cast<Eigen::Index>(c)) =
          norm * std::sin(j * kPi * coords[c] / length);
  return m;
}

std::vector<double> axis(std::size_t n, double length) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = length * static_cast<double>(i) / static_cast<double>(n);
  return xs;
}

int exp_offset(int j_count) { return j_count / 2 - 1; }

// Position of mode (j, k) relative to the ComplexExp2D truncation.
enum class ExpRole { Center, Representative, Partner, Edge };

ExpRole exp_role(int j, int k, int jx, int jy) {
  if (j == 0 && k == 0) return ExpRole::Center;
  if (j == jx / 2 || k == jy / 2) return ExpRole::Edge;
  if (j > 0 || (j == 0 && k > 0)) return ExpRole::Representative;
  return ExpRole::Partner;
}

}  // namespace

BasisSpec BasisSpec::sine_1d(int j, double length) {
  return {BasisKind::Sine1D, length, 1.0, j, 1};
}
BasisSpec BasisSpec::sine_2d(int j, double length) {
  return {BasisKind::Sine2D, length, length, j, j};
}
BasisSpec BasisSpec::complex_exp_2d(int j, double length) {
  return {BasisKind::ComplexExp2D, length, length, j, j};
}

void BasisSpec::validate(std::size_t mode_cap) const {
  if (!(lx > 0.0) || !(ly > 0.0))
    throw InvalidArgument("basis: domain lengths must be positive");
  if (jx < 1 || jy < 1)
    throw InvalidArgument("basis: truncation degrees must be >= 1");
  if (kind == BasisKind::Sine1D && jy != 1)
    throw InvalidArgument("basis: Sine1D has no second truncation degree");
  if (kind == BasisKind::ComplexExp2D && (jx % 2 != 0 || jy % 2 != 0))
    throw InvalidArgument("basis: ComplexExp2D truncation degrees must be even");
  if (static_cast<std::size_t>(jx) > mode_cap ||
      static_cast<std::size_t>(jy) > mode_cap)
    throw ResourceLimitError("basis: truncation " + std::to_string(jx) + "x" +
                             std::to_string(jy) + " exceeds mode cap " +
                             std::to_string(mode_cap));
}

double SpectrumSpec::eigenvalue(int j, int k) const {
  switch (kind) {
    case SpectrumKind::Identity:
      return 1.0;
    case SpectrumKind::PolyDecay1D:
      return std::pow(static_cast<double>(j / 2 + 1), -(2.0 * r + 1.0 + eps));
    case SpectrumKind::GaussDecay2D:
      return std::exp(-alpha * (static_cast<double>(j) * j +
                                static_cast<double>(k) * k));
  }
  return 1.0;
}

void SpectrumSpec::validate() const {
  if (kind == SpectrumKind::PolyDecay1D && (r < 0.0 || !(eps > 0.0)))
    throw InvalidArgument("spectrum: PolyDecay1D needs r >= 0 and eps > 0");
  if (kind == SpectrumKind::GaussDecay2D && !(alpha > 0.0))
    throw InvalidArgument("spectrum: GaussDecay2D needs alpha > 0");
}

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Sine1D: return "sine1d";
    case BasisKind::Sine2D: return "sine2d";
    case BasisKind::ComplexExp2D: return "complex_exp2d";
  }
  return "unknown";
}

std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::Identity: return "identity";
    case SpectrumKind::PolyDecay1D: return "poly_decay1d";
    case SpectrumKind::GaussDecay2D: return "gauss_decay2d";
  }
  return "unknown";
}

Eigen::MatrixXd eval_basis(const BasisSpec& basis, std::span<const Point> points,
                           std::size_t mode_cap) {
  if (points.empty()) throw InvalidArgument("eval_basis: empty grid");
  basis.validate(mode_cap);
  const auto n_pts = static_cast<Eigen::Index>(points.size());

  switch (basis.kind) {
    case BasisKind::Sine1D: {
      std::vector<double> xs;
      xs.reserve(points.size());
      for (const auto& p : points) xs.push_back(p.x);
      return sine_rows(basis.jx, basis.lx, xs);
    }
    case BasisKind::Sine2D: {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(basis.n_modes()), n_pts);
      const double norm = 2.0 / std::sqrt(basis.lx * basis.ly);
      for (int j = 1; j <= basis.jx; ++j)
        for (int k = 1; k <= basis.jy; ++k)
          for (Eigen::Index c = 0; c < n_pts; ++c) {
            const auto& p = points[static_cast<std::size_t>(c)];
            m((j - 1) * basis.jy + (k - 1), c) =
                norm * std::sin(j * kPi * p.x / basis.lx) *
                std::sin(k * kPi * p.y / basis.ly);
          }
      return m;
    }
    case BasisKind::ComplexExp2D: {
      const auto modes = static_cast<Eigen::Index>(basis.n_modes());
      Eigen::MatrixXd m(2 * modes, n_pts);
      const double norm = 1.0 / std::sqrt(basis.lx * basis.ly);
      const int ox = exp_offset(basis.jx), oy = exp_offset(basis.jy);
      for (int a = 0; a < basis.jx; ++a)
        for (int b = 0; b < basis.jy; ++b) {
          const int j = a - ox, k = b - oy;
          const Eigen::Index row = a * basis.jy + b;
          for (Eigen::Index c = 0; c < n_pts; ++c) {
            const auto& p = points[static_cast<std::size_t>(c)];
            const double theta =
                2.0 * kPi * (j * p.x / basis.lx + k * p.y / basis.ly);
            m(row, c) = norm * std::cos(theta);
            m(modes + row, c) = norm * std::sin(theta);
          }
        }
      return m;
    }
  }
  return {};
}

Eigen::MatrixXd eval_basis(const BasisSpec& basis, const Grid& grid,
                           std::size_t mode_cap) {
  std::vector<Point> pts;
  pts.reserve(grid.points());
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t j = 0; j < grid.ny; ++j)
      pts.push_back({grid.x(i), grid.two_d ? grid.y(j) : 0.0});
  return eval_basis(basis, std::span<const Point>(pts), mode_cap);
}

std::vector<double> basis_row_eigenvalues(const BasisSpec& basis,
                                          const SpectrumSpec& spectrum) {
  std::vector<double> lambda;
  switch (basis.kind) {
    case BasisKind::Sine1D:
      for (int j = 1; j <= basis.jx; ++j)
        lambda.push_back(spectrum.eigenvalue(j));
      break;
    case BasisKind::Sine2D:
      for (int j = 1; j <= basis.jx; ++j)
        for (int k = 1; k <= basis.jy; ++k)
          lambda.push_back(spectrum.eigenvalue(j, k));
      break;
    case BasisKind::ComplexExp2D: {
      const int ox = exp_offset(basis.jx), oy = exp_offset(basis.jy);
      for (int a = 0; a < basis.jx; ++a)
        for (int b = 0; b < basis.jy; ++b)
          lambda.push_back(spectrum.eigenvalue(a - ox, b - oy));
      const auto half = lambda.size();
      for (std::size_t i = 0; i < half; ++i) lambda.push_back(lambda[i]);
      break;
    }
  }
  return lambda;
}

ModeSampler::ModeSampler(const BasisSpec& basis, std::uint64_t seed, double dt)
    : basis_(basis), seed_(seed), dt_(dt), sqrt_dt_(std::sqrt(dt)) {
  if (!(dt > 0.0)) throw InvalidArgument("noise: dt must be positive");
}

Eigen::MatrixXd ModeSampler::draw_sine(std::size_t step,
                                       std::uint32_t trajectory) const {
  if (basis_.kind == BasisKind::ComplexExp2D)
    throw InvalidArgument("draw_sine: basis is not a sine basis");
  const auto n = static_cast<std::uint32_t>(step);
  Eigen::MatrixXd db(basis_.jx, basis_.jy);
  if (basis_.kind == BasisKind::Sine1D) {
    for (int jp = 0; 2 * jp < basis_.jx; ++jp) {
      const auto z = normal_pair(seed_, n, static_cast<std::uint32_t>(jp),
                                 kLineTag, trajectory);
      db(2 * jp, 0) = z.first * sqrt_dt_;
      if (2 * jp + 1 < basis_.jx) db(2 * jp + 1, 0) = z.second * sqrt_dt_;
    }
    return db;
  }
  for (int j = 0; j < basis_.jx; ++j)
    for (int kp = 0; 2 * kp < basis_.jy; ++kp) {
      const auto z = normal_pair(seed_, n, static_cast<std::uint32_t>(j),
                                 static_cast<std::uint32_t>(kp), trajectory);
      db(j, 2 * kp) = z.first * sqrt_dt_;
      if (2 * kp + 1 < basis_.jy) db(j, 2 * kp + 1) = z.second * sqrt_dt_;
    }
  return db;
}

Eigen::MatrixXcd ModeSampler::draw_complex(std::size_t step,
                                           std::uint32_t trajectory) const {
  if (basis_.kind != BasisKind::ComplexExp2D)
    throw InvalidArgument("draw_complex: basis is not ComplexExp2D");
  const auto n = static_cast<std::uint32_t>(step);
  const int ox = exp_offset(basis_.jx), oy = exp_offset(basis_.jy);
  const double half_sd = std::sqrt(dt_ / 2.0);
  Eigen::MatrixXcd db(basis_.jx, basis_.jy);
  for (int a = 0; a < basis_.jx; ++a)
    for (int b = 0; b < basis_.jy; ++b) {
      const int j = a - ox, k = b - oy;
      const auto role = exp_role(j, k, basis_.jx, basis_.jy);
      if (role == ExpRole::Partner) continue;
      const auto z = normal_pair(seed_, n, static_cast<std::uint32_t>(j),
                                 static_cast<std::uint32_t>(k), trajectory);
      if (role == ExpRole::Center) {
        db(a, b) = Complex(z.first * sqrt_dt_, 0.0);
      } else {
        db(a, b) = Complex(z.first * half_sd, z.second * half_sd);
        if (role == ExpRole::Representative)
          db(-j + ox, -k + oy) = std::conj(db(a, b));
      }
    }
  return db;
}

std::vector<double> NoisePath::path_values() const {
  const std::size_t pts = grid.points();
  std::vector<double> w((n_steps + 1) * pts, 0.0);
  for (std::size_t n = 0; n < n_steps; ++n)
    for (std::size_t m = 0; m < pts; ++m)
      w[(n + 1) * pts + m] = w[n * pts + m] + increments[n * pts + m];
  return w;
}

NoisePath sample_path(const BasisSpec& basis, const SpectrumSpec& spectrum,
                      std::size_t n_steps, double dt, const Grid& grid,
                      std::uint64_t seed, int n_trajectories,
                      std::size_t mode_cap) {
  if (!(dt > 0.0)) throw InvalidArgument("sample_path: dt must be positive");
  if (n_steps < 1) throw InvalidArgument("sample_path: n_steps must be >= 1");
  if (n_trajectories < 1)
    throw InvalidArgument("sample_path: n_trajectories must be >= 1");
  if (grid.points() == 0) throw InvalidArgument("sample_path: empty grid");
  if (basis.two_d() != grid.two_d)
    throw InvalidArgument("sample_path: basis and grid dimension differ");
  basis.validate(mode_cap);
  spectrum.validate();

  NoisePath path;
  path.grid = grid;
  path.basis = basis;
  path.spectrum = spectrum;
  path.seed = seed;
  path.dt = dt;
  path.n_steps = n_steps;
  path.n_trajectories = n_trajectories;
  path.increments.assign(n_steps * grid.points(), 0.0);

  const ModeSampler sampler(basis, seed, dt);
  const auto trajectories = static_cast<std::uint32_t>(n_trajectories);

  if (basis.kind == BasisKind::ComplexExp2D) {
    // Fold every mode onto the grid wavenumbers and inverse transform.
    const int ox = exp_offset(basis.jx), oy = exp_offset(basis.jy);
    const double norm = 1.0 / std::sqrt(basis.lx * basis.ly);
    const auto nx = static_cast<long>(grid.nx), ny = static_cast<long>(grid.ny);
    Eigen::MatrixXd sqrt_lambda(basis.jx, basis.jy);
    for (int a = 0; a < basis.jx; ++a)
      for (int b = 0; b < basis.jy; ++b)
        sqrt_lambda(a, b) = std::sqrt(spectrum.eigenvalue(a - ox, b - oy));
    auto fold = [&](long j, long k) {
      const long p = ((j % nx) + nx) % nx, q = ((k % ny) + ny) % ny;
      return static_cast<std::size_t>(p * ny + q);
    };
    Fft2D fft(grid.nx, grid.ny);
    std::vector<Complex> spec(grid.points()), phys(grid.points());
    const double unnormalise = static_cast<double>(grid.points());
    for (std::size_t n = 0; n < n_steps; ++n) {
      Eigen::MatrixXcd coeff = Eigen::MatrixXcd::Zero(basis.jx, basis.jy);
      for (std::uint32_t m = 0; m < trajectories; ++m)
        coeff += sampler.draw_complex(n, m);
      std::fill(spec.begin(), spec.end(), Complex(0.0, 0.0));
      for (int a = 0; a < basis.jx; ++a)
        for (int b = 0; b < basis.jy; ++b) {
          const int j = a - ox, k = b - oy;
          const Complex c = norm * sqrt_lambda(a, b) * coeff(a, b);
          if (exp_role(j, k, basis.jx, basis.jy) == ExpRole::Edge) {
            spec[fold(j, k)] += c / std::numbers::sqrt2;
            spec[fold(-j, -k)] += std::conj(c) / std::numbers::sqrt2;
          } else {
            spec[fold(j, k)] += c;
          }
        }
      fft.inverse(spec, phys);
      double* out = path.increments.data() + n * grid.points();
      for (std::size_t i = 0; i < grid.points(); ++i)
        out[i] = phys[i].real() * unnormalise;
    }
    return path;
  }

  const Eigen::MatrixXd px = sine_rows(basis.jx, basis.lx, axis(grid.nx, grid.lx));
  Eigen::MatrixXd weight(basis.jx, basis.jy);
  for (int j = 0; j < basis.jx; ++j)
    for (int k = 0; k < basis.jy; ++k)
      weight(j, k) = std::sqrt(spectrum.eigenvalue(j + 1, k + 1));

  if (basis.kind == BasisKind::Sine1D) {
    for (std::size_t n = 0; n < n_steps; ++n) {
      Eigen::VectorXd coeff = Eigen::VectorXd::Zero(basis.jx);
      for (std::uint32_t m = 0; m < trajectories; ++m)
        coeff += sampler.draw_sine(n, m).col(0);
      coeff.array() *= weight.col(0).array();
      Eigen::Map<Eigen::VectorXd> out(path.increments.data() + n * grid.points(),
                                      static_cast<Eigen::Index>(grid.nx));
      out.noalias() = px.transpose() * coeff;
    }
    return path;
  }

  const Eigen::MatrixXd py = sine_rows(basis.jy, basis.ly, axis(grid.ny, grid.ly));
  for (std::size_t n = 0; n < n_steps; ++n) {
    Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(basis.jx, basis.jy);
    for (std::uint32_t m = 0; m < trajectories; ++m)
      coeff += sampler.draw_sine(n, m);
    coeff.array() *= weight.array();
    // Row-major x-outer storage is the transpose of Eigen's default layout.
    Eigen::Map<Eigen::MatrixXd> out(path.increments.data() + n * grid.points(),
                                    static_cast<Eigen::Index>(grid.ny),
                                    static_cast<Eigen::Index>(grid.nx));
    out.noalias() = py.transpose() * coeff.transpose() * px;
  }
  return path;
}

std::vector<double> increments_to_white_noise(const NoisePath& path) {
  if (!(path.dt > 0.0)) throw InvalidArgument("white noise: dt must be positive");
  std::vector<double> xi(path.increments.size());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = path.increments[i] / path.dt;
  return xi;
}

double pointwise_variance_rate(const BasisSpec& basis,
                               const SpectrumSpec& spectrum, Point p,
                               int n_trajectories) {
  const Point pts[1] = {p};
  const Eigen::MatrixXd rows = eval_basis(basis, std::span<const Point>(pts));
  const auto lambda = basis_row_eigenvalues(basis, spectrum);
  double total = 0.0;
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    total += lambda[static_cast<std::size_t>(r)] * rows(r, 0) * rows(r, 0);
  return total * n_trajectories;
}

}  // namespace spdegen
