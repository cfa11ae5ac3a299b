#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "spdegen/grid.hpp"

namespace spdegen {

enum class InitKind { GL, KdV, Wave, Phi42, NSEGaussian, NSEShifted };

std::string to_string(InitKind kind);
InitKind init_kind_from_string(const std::string& name);

/// Initial-condition recipe for one sample.
///
/// `seed` drives the random perturbation of this sample. `base_seed` drives
/// the fixed Gaussian random field of the NSE presets (the same for every
/// sample of a dataset).
struct InitSpec {
  InitKind kind = InitKind::GL;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t base_seed = 0;

  /// kappa in {0, 0.1} for the shipped presets.
  bool canonical() const { return kappa == 0.0 || kappa == 0.1; }
};

struct InitialState {
  Field u0;
  std::optional<Field> v0;
};

/// eta(x) = sum_{k=-10}^{10} a_k / (|k|+1)^2 sin(2 k pi x), a_k iid N(0,1).
Field eta_1d(const Grid& grid, std::uint64_t seed);

/// eta(x,y) = a_0 + sum_{j,k=-10}^{10} a_jk / (j^2+k^2+1) sin((j pi x - k pi y)/2).
Field eta_2d(const Grid& grid, std::uint64_t seed);

/// Gaussian random field with covariance 3^{3/2} (-Delta + 9 I)^{-3} on the
/// periodic square. Mode k has variance 3^{3/2} (4 pi^2 |k|^2 + 9)^{-3};
/// the mean mode is zero.
Field nse_grf(const Grid& grid, std::uint64_t seed);

/// Eigenvalue of the NSE initial-condition covariance for integer
/// wavenumber (k1, k2) on the unit torus.
double nse_grf_variance(long k1, long k2);

InitialState make_initial(const InitSpec& spec, const Grid& grid);

}  // namespace spdegen
