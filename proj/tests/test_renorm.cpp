#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spdegen/error.hpp"
#include "spdegen/initcond.hpp"
#include "spdegen/metrics.hpp"
#include "spdegen/noise.hpp"
#include "spdegen/renorm.hpp"
#include "spdegen/solvers.hpp"
#include "spdegen/validation.hpp"

using namespace spdegen;

namespace {

constexpr double kPi = std::numbers::pi;

EquationConfig phi42() { return EquationConfig::preset(Equation::Phi42); }

NoisePath sine_noise(const EquationConfig& c, int J, std::uint64_t seed) {
  return sample_path(BasisSpec::sine_2d(J), SpectrumSpec::identity(), c.n_steps, c.dt(),
                     c.grid, seed);
}

Field standard_u0(const EquationConfig& c) {
  return make_initial({InitKind::Phi42, 0.0, 0}, c.grid).u0;
}

Trajectory filled(const Grid& g, std::size_t slices, double value) {
  Trajectory t(g, slices);
  std::fill(t.values.begin(), t.values.end(), value);
  return t;
}

void expect_all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    EXPECT_TRUE(r.passed) << r.name << ": " << r.value << " vs " << r.threshold << " ("
                          << r.detail << ")";
}

}  // namespace

TEST(StochasticConvolution, SigmaZeroIsDiscreteHeatFlow) {
  auto c = phi42();
  c.sigma = 0.0;
  const std::size_t n = c.grid.nx;
  Field u0(c.grid);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      u0(i, j) = std::sin(2 * kPi * c.grid.x(i)) * std::sin(2 * kPi * c.grid.y(j));
  const auto x = stochastic_convolution(u0, sine_noise(c, 4, 1), c);

  const double dx = c.grid.dx();
  const double mu = 2.0 * 4.0 * std::pow(std::sin(kPi / static_cast<double>(n)), 2) / (dx * dx);
  const std::size_t last = x.n_slices() - 1;
  const double steps = x.times[last] / c.dt();
  const double factor = std::pow(1.0 - c.dt() * mu, std::round(steps));
  const Field xl = x.field(last);
  for (std::size_t i = 0; i < c.grid.points(); ++i)
    EXPECT_NEAR(xl.values[i], factor * u0.values[i], 1e-12);
  // The continuum decay rate agrees to the spatial truncation error.
  const double continuum = std::exp(-8.0 * kPi * kPi * x.times[last]);
  EXPECT_NEAR(factor / continuum, 1.0, 2e-2);
}

TEST(StochasticConvolution, DrivenPartSharesNoiseIncrements) {
  auto c = phi42();
  const Field zero(c.grid);
  const auto noise = sine_noise(c, 2, 77);
  const auto x = stochastic_convolution(zero, noise, c);
  ASSERT_GE(x.n_slices(), 2u);
  ASSERT_EQ(c.save_stride, 1u);
  // One step from rest: X(dt) = sum gain dB phi with gain ~ sigma for low modes.
  std::vector<double> expect(c.grid.points());
  auto dw = noise.slice(0);
  for (std::size_t i = 0; i < expect.size(); ++i) expect[i] = c.sigma * dw[i];
  const auto got = x.slice(1);
  EXPECT_LT(relative_l2(std::span<const double>(got), std::span<const double>(expect)), 1e-2);
}

TEST(StochasticConvolution, RejectsIncompatibleNoise) {
  auto c = phi42();
  const Field u0 = standard_u0(c);
  const auto complex_noise = sample_path(BasisSpec::complex_exp_2d(4), SpectrumSpec::identity(),
                                         c.n_steps, c.dt(), c.grid, 1);
  EXPECT_THROW(stochastic_convolution(u0, complex_noise, c), InvalidArgument);
  const auto coloured = sample_path(BasisSpec::sine_2d(4), SpectrumSpec::gauss_decay(1.0),
                                    c.n_steps, c.dt(), c.grid, 1);
  EXPECT_THROW(stochastic_convolution(u0, coloured, c), InvalidArgument);
  const auto short_noise = sample_path(BasisSpec::sine_2d(4), SpectrumSpec::identity(),
                                       c.n_steps - 1, c.dt(), c.grid, 1);
  EXPECT_THROW(stochastic_convolution(u0, short_noise, c), InvalidArgument);
  auto wrong_eq = EquationConfig::preset(Equation::NSEVorticity);
  EXPECT_THROW(stochastic_convolution(u0, sine_noise(c, 4, 1), wrong_eq), InvalidArgument);
}

TEST(RenormConstant, ZeroAtTimeZeroAndClosedFormAtJOne) {
  auto c = phi42();
  for (double v : renorm_constant(16, 0.0, c).values) EXPECT_EQ(v, 0.0);
  const double t = 0.01;
  const Field a = renorm_constant(1, t, c);
  const double lam = 2.0 * kPi * kPi;
  const double weight = c.sigma * c.sigma * -std::expm1(-2.0 * lam * t) / (2.0 * lam);
  for (std::size_t i = 0; i < c.grid.nx; ++i)
    for (std::size_t j = 0; j < c.grid.ny; ++j) {
      const double phi = 2.0 * std::sin(kPi * c.grid.x(i)) * std::sin(kPi * c.grid.y(j));
      EXPECT_NEAR(a(i, j), weight * phi * phi, 1e-15);
    }
  EXPECT_THROW(renorm_constant(0, t, c), InvalidArgument);
  EXPECT_THROW(renorm_constant(4, -1.0, c), InvalidArgument);
  EXPECT_THROW(renorm_constant_series(0, c), InvalidArgument);
}

TEST(RenormConstant, MonotoneInTimeAndTruncation) {
  auto c = phi42();
  double prev = -1.0;
  for (double t : {0.0, 0.001, 0.005, 0.01, 0.02}) {
    const double a = renorm_constant_mean(8, t, c);
    EXPECT_GT(a, prev);
    prev = a;
  }
  prev = -1.0;
  for (int J : {1, 2, 8, 32, 64, 128}) {
    const double a = renorm_constant_mean(J, c.T, c);
    EXPECT_GT(a, prev) << J;
    prev = a;
  }
  const auto check = check_renorm_monotone();
  EXPECT_TRUE(check.passed) << check.detail;
}

TEST(RenormConstant, LogarithmicGrowthInTruncation) {
  auto c = phi42();
  const double a8 = renorm_constant_mean(8, c.T, c);
  const double a32 = renorm_constant_mean(32, c.T, c);
  const double a128 = renorm_constant_mean(128, c.T, c);
  const double ratio = (a128 - a32) / (a32 - a8);
  ASSERT_TRUE(std::isfinite(ratio));
  // Equal increments per factor of four in J indicate growth like log J.
  EXPECT_GT(ratio, 0.8);
  EXPECT_LT(ratio, 1.25);
}

TEST(RenormConstant, SeriesMatchesPointwiseEvaluation) {
  auto c = phi42();
  const auto series = renorm_constant_series(8, c);
  ASSERT_EQ(series.n_slices(), c.n_steps);
  for (std::size_t n : {std::size_t{0}, std::size_t{7}, c.n_steps - 1}) {
    const Field a = renorm_constant(8, series.times[n], c);
    for (std::size_t i = 0; i < a.values.size(); ++i)
      EXPECT_NEAR(series.slice(n)[i], a.values[i], 1e-15);
  }
}

TEST(RenormConstant, OuVarianceMatchesMonteCarlo) {
  expect_all_passed(check_ou_variance(400, 31));
}

TEST(WickPowers, DegenerateInputs) {
  const Grid g = Grid::square(8);
  Trajectory x(g, 3);
  const Trajectory a = filled(g, 3, 0.7);
  auto [x2, x3] = wick_powers(x, a);
  for (double v : x2.values) EXPECT_DOUBLE_EQ(v, -0.7);
  for (double v : x3.values) EXPECT_DOUBLE_EQ(v, 0.0);

  for (std::size_t i = 0; i < x.values.size(); ++i) x.values[i] = 0.1 * static_cast<double>(i % 13) - 0.5;
  auto [y2, y3] = wick_powers(x, Trajectory(g, 3));
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    EXPECT_DOUBLE_EQ(y2.values[i], x.values[i] * x.values[i]);
    EXPECT_DOUBLE_EQ(y3.values[i], x.values[i] * x.values[i] * x.values[i]);
  }
  EXPECT_THROW(wick_powers(x, Trajectory(g, 2)), InvalidArgument);
  EXPECT_THROW(wick_powers(x, Trajectory(Grid::square(4), 3)), InvalidArgument);
}

TEST(WickPowers, IdentitiesAndCentering) {
  const auto identities = check_wick_identities(5);
  EXPECT_TRUE(identities.passed) << identities.detail;
  expect_all_passed(check_wick_centering(400, 17));
}

TEST(SolveShift, ZeroForcingStaysZero) {
  auto c = phi42();
  const Trajectory zero(c.grid, c.n_steps);
  const auto v = solve_shift(zero, zero, zero, c);
  for (double x : v.values) EXPECT_EQ(x, 0.0);
}

TEST(SolveShift, ConstantForcingFirstStep) {
  auto c = phi42();
  const double value = 0.8;
  const Trajectory x = filled(c.grid, c.n_steps, value);
  const Trajectory x2 = filled(c.grid, c.n_steps, value * value);
  const Trajectory x3 = filled(c.grid, c.n_steps, value * value * value);
  const auto v = solve_shift(x, x2, x3, c);
  for (double s : v.slice(0)) EXPECT_EQ(s, 0.0);
  for (double s : v.slice(1)) EXPECT_NEAR(s, -c.dt() * value * value * value, 1e-15);
  EXPECT_THROW(solve_shift(Trajectory(c.grid, 3), x2, x3, c), InvalidArgument);
}

TEST(RenormalizedBundle, DecompositionAndStrides) {
  auto c = phi42();
  c.save_stride = 5;
  const auto b = renormalized_bundle(standard_u0(c), sine_noise(c, 8, 3), c);
  EXPECT_EQ(b.J, 8);
  EXPECT_EQ(b.u.n_slices(), c.n_saved());
  EXPECT_EQ(b.x.n_slices(), b.u.n_slices());
  EXPECT_EQ(b.a_mean.size(), b.u.n_slices());
  for (std::size_t i = 0; i < b.u.values.size(); ++i)
    EXPECT_NEAR(b.u.values[i] - b.x.values[i], b.v.values[i], 1e-12);
  const auto direct = solve_phi42_renormalized(standard_u0(c), sine_noise(c, 8, 3), c);
  EXPECT_EQ(direct.values, b.u.values);
}

TEST(RenormalizedSolver, DeterministicLimitMatchesExplicit) {
  const auto check = check_phi42_deterministic_equivalence();
  EXPECT_TRUE(check.passed) << check.value << " " << check.detail;
}

TEST(RenormalizedSolver, GapToExplicitGrowsWithNoiseAndTruncation) {
  auto c = phi42();
  const Field u0 = standard_u0(c);
  auto gap = [&](double sigma, int J) {
    c.sigma = sigma;
    const auto noise = sine_noise(c, J, 11);
    return relative_l2(solve_phi42_renormalized(u0, noise, c), solve_phi42_explicit(u0, noise, c));
  };
  const double g1 = gap(0.1, 2), g2 = gap(0.2, 2), g8 = gap(0.1, 8);
  EXPECT_GT(g2, 1.5 * g1);
  EXPECT_GT(g8, 2.0 * g1);
}

TEST(RenormalizedSolver, TruncationChangesOutput) {
  auto c = phi42();
  const Field u0 = standard_u0(c);
  double total = 0.0;
  const int n = 2;
  for (int s = 0; s < n; ++s) {
    const auto lo = solve_phi42_renormalized(u0, sine_noise(c, 2, 100 + s), c);
    const auto hi = solve_phi42_renormalized(u0, sine_noise(c, 128, 100 + s), c);
    total += relative_l2(lo, hi);
  }
  EXPECT_GT(total / n, 0.05);
}
