#include "spdegen/initcond.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "spdegen/error.hpp"
#include "spdegen/fft.hpp"
#include "spdegen/rng.hpp"

namespace spdegen {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kEtaModes = 10;
}  // namespace

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::GL: return "gl";
    case InitKind::KdV: return "kdv";
    case InitKind::Wave: return "wave";
    case InitKind::Phi42: return "phi42";
    case InitKind::NSEGaussian: return "nse_gaussian";
    case InitKind::NSEShifted: return "nse_shifted";
  }
  return "unknown";
}

InitKind init_kind_from_string(const std::string& name) {
  if (name == "gl") return InitKind::GL;
  if (name == "kdv") return InitKind::KdV;
  if (name == "wave") return InitKind::Wave;
  if (name == "phi42") return InitKind::Phi42;
  if (name == "nse_gaussian") return InitKind::NSEGaussian;
  if (name == "nse_shifted") return InitKind::NSEShifted;
  throw InvalidArgument("unknown initial-condition kind: " + name);
}

Field eta_1d(const Grid& grid, std::uint64_t seed) {
  NormalStream normals(seed, 1);
  std::vector<double> weight;
  std::vector<int> wavenumber;
  for (int k = -kEtaModes; k <= kEtaModes; ++k) {
    const double a = normals.next();
    const double d = std::abs(k) + 1.0;
    weight.push_back(a / (d * d));
    wavenumber.push_back(k);
  }
  Field eta(grid);
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    double s = 0.0;
    for (std::size_t t = 0; t < weight.size(); ++t)
      s += weight[t] * std::sin(2.0 * wavenumber[t] * kPi * x);
    for (std::size_t j = 0; j < grid.ny; ++j) eta(i, j) = s;
  }
  return eta;
}

Field eta_2d(const Grid& grid, std::uint64_t seed) {
  NormalStream normals(seed, 2);
  const double a0 = normals.next();
  constexpr int width = 2 * kEtaModes + 1;
  std::vector<double> weight(width * width);
  for (int j = -kEtaModes; j <= kEtaModes; ++j)
    for (int k = -kEtaModes; k <= kEtaModes; ++k)
      weight[(j + kEtaModes) * width + (k + kEtaModes)] =
          normals.next() / (j * j + k * k + 1.0);
  Field eta(grid);
  for (std::size_t ix = 0; ix < grid.nx; ++ix)
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
      const double x = grid.x(ix), y = grid.y(iy);
      double s = a0;
      for (int j = -kEtaModes; j <= kEtaModes; ++j)
        for (int k = -kEtaModes; k <= kEtaModes; ++k)
          s += weight[(j + kEtaModes) * width + (k + kEtaModes)] *
               std::sin((j * kPi * x - k * kPi * y) / 2.0);
      eta(ix, iy) = s;
    }
  return eta;
}

double nse_grf_variance(long k1, long k2) {
  const double k2sum = static_cast<double>(k1 * k1 + k2 * k2);
  return std::pow(3.0, 1.5) * std::pow(4.0 * kPi * kPi * k2sum + 9.0, -3.0);
}

Field nse_grf(const Grid& grid, std::uint64_t seed) {
  if (!grid.two_d || grid.nx != grid.ny)
    throw InvalidArgument("nse_grf: grid must be N x N periodic");
  const std::size_t n = grid.nx;
  std::vector<Complex> spec(n * n, Complex(0.0, 0.0));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      const long k1 = signed_wavenumber(p, n), k2 = signed_wavenumber(q, n);
      const std::size_t pp = (n - p) % n, qq = (n - q) % n;
      const bool self_conjugate = (pp == p && qq == q);
      if (p == 0 && q == 0) continue;
      // Visit each conjugate pair once, from the lexicographically larger index.
      if (!self_conjugate && (p * n + q) < (pp * n + qq)) continue;
      const auto z = normal_pair(seed, static_cast<std::uint32_t>(k1),
                                 static_cast<std::uint32_t>(k2), 0x67726Fu, 0u);
      const double var = nse_grf_variance(k1, k2);
      if (self_conjugate) {
        spec[p * n + q] = Complex(std::sqrt(var) * z.first, 0.0);
      } else {
        const double sd = std::sqrt(var / 2.0);
        spec[p * n + q] = Complex(sd * z.first, sd * z.second);
        spec[pp * n + qq] = std::conj(spec[p * n + q]);
      }
    }
  Fft2D fft(n, n);
  std::vector<Complex> phys(n * n);
  fft.inverse(spec, phys);
  Field w(grid);
  const double unnormalise = static_cast<double>(n * n);
  for (std::size_t i = 0; i < n * n; ++i) w.values[i] = phys[i].real() * unnormalise;
  return w;
}

InitialState make_initial(const InitSpec& spec, const Grid& grid) {
  InitialState state;
  state.u0 = Field(grid);
  auto& u0 = state.u0;
  const bool perturb = spec.kappa != 0.0;

  switch (spec.kind) {
    case InitKind::GL:
    case InitKind::KdV:
    case InitKind::Wave: {
      if (grid.two_d) throw InvalidArgument("make_initial: 1D kind on 2D grid");
      for (std::size_t i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i);
        u0(i) = spec.kind == InitKind::GL ? x * (1.0 - x)
                                          : std::sin(2.0 * kPi * x);
      }
      if (perturb) {
        const Field eta = eta_1d(grid, spec.seed);
        for (std::size_t i = 0; i < grid.nx; ++i) u0(i) += spec.kappa * eta(i);
      }
      if (spec.kind == InitKind::Wave) {
        Field v0(grid);
        for (std::size_t i = 0; i < grid.nx; ++i) {
          const double x = grid.x(i);
          v0(i) = x * (1.0 - x);
        }
        state.v0 = std::move(v0);
      }
      return state;
    }
    case InitKind::Phi42: {
      if (!grid.two_d) throw InvalidArgument("make_initial: Phi42 needs a 2D grid");
      for (std::size_t i = 0; i < grid.nx; ++i)
        for (std::size_t j = 0; j < grid.ny; ++j) {
          const double s = 2.0 * kPi * (grid.x(i) + grid.y(j));
          u0(i, j) = std::sin(s) + std::cos(s);
        }
      if (perturb) {
        const Field eta = eta_2d(grid, spec.seed);
        for (std::size_t i = 0; i < grid.points(); ++i)
          u0.values[i] += spec.kappa * eta.values[i];
      }
      return state;
    }
    case InitKind::NSEGaussian:
      state.u0 = nse_grf(grid, spec.base_seed);
      return state;
    case InitKind::NSEShifted: {
      state.u0 = nse_grf(grid, spec.base_seed);
      const Field w0 = nse_grf(grid, spec.seed);
      for (std::size_t i = 0; i < grid.points(); ++i)
        state.u0.values[i] += w0.values[i];
      return state;
    }
  }
  throw InvalidArgument("make_initial: unknown kind");
}

}  // namespace spdegen
