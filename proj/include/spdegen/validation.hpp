#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdegen/config.hpp"
#include "spdegen/grid.hpp"
#include "spdegen/solvers.hpp"

namespace spdegen {

/// Outcome of one numerical check: `value` is compared against
/// `threshold` as described by `detail`.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

nlohmann::json to_json(const std::vector<CheckResult>& results);
std::string to_table(const std::vector<CheckResult>& results);
bool all_passed(const std::vector<CheckResult>& results);

struct ValidationOptions {
  std::size_t paths = 10000;
  std::uint64_t seed = 12345;
  /// Include the self-convergence and order-of-accuracy runs.
  bool convergence = true;
};

// Noise statistics.
/// Var[dW(0.5)] of cylindrical Sine1D (L = 1, J = 32) against 32 dt.
CheckResult check_noise_variance(std::size_t paths, std::uint64_t seed);
/// Cov[W(t,x), W(t,x')] against t sum lambda phi(x) phi(x') at 5 probe pairs
/// for the cylindrical, poly-decay and 2D Gaussian-decay spectra.
std::vector<CheckResult> check_noise_covariance(std::size_t paths, std::uint64_t seed);
/// Lag-one correlation of increments at one point, against 4 / sqrt(paths).
CheckResult check_increment_independence(std::size_t paths, std::uint64_t seed);

// Deterministic limits.
CheckResult check_wave_standing_wave();
CheckResult check_kdv_linear_mode();
CheckResult check_nse_single_mode();
CheckResult check_phi42_constant_ode();
CheckResult check_gl_linear_growth();
CheckResult check_phi42_stability_gate();
/// sigma = 0 renormalised pipeline against the explicit solver.
CheckResult check_phi42_deterministic_equivalence();

// Self-convergence and orders of accuracy.
CheckResult check_kdv_self_convergence();
CheckResult check_nse_self_convergence();
std::vector<CheckResult> check_time_orders();

// Renormalisation.
/// Sample mean of X2 over `paths` zero-initial draws at 5 probe points.
std::vector<CheckResult> check_wick_centering(std::size_t paths, std::uint64_t seed);
CheckResult check_wick_identities(std::uint64_t seed);
CheckResult check_renorm_monotone();
/// Monte-Carlo Var[X] against a(t, x) at J = 2 and J = 8.
std::vector<CheckResult> check_ou_variance(std::size_t paths, std::uint64_t seed);

/// Checks relevant to `cfg` (all of them without a config). A config that
/// fails its own validation is reported as a failed check.
std::vector<CheckResult> run_validation(const ValidationOptions& options,
                                        const std::optional<RunConfig>& cfg = std::nullopt);

/// State at exactly time `T` after `n` steps of size T / n.
Field final_state(EquationConfig cfg, double T, std::size_t n, const Field& u0,
                  const Field* v0 = nullptr);

/// Band-limited interpolation of a periodic square field onto a grid
/// `factor` times finer; the source Nyquist modes are dropped.
Field spectral_upsample(const Field& f, std::size_t factor);

}  // namespace spdegen
