#include <gtest/gtest.h>

#include <cstdlib>
#include <set>
#include <tuple>

#include "spdegen/config.hpp"
#include "spdegen/error.hpp"
#include "test_util.hpp"

using namespace spdegen;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigDir = SPDEGEN_TEST_CONFIG_DIR;

RunConfig preset(const std::string& name, const json& overrides = json::object()) {
  return load_preset(name, kConfigDir, overrides);
}

}  // namespace

TEST(Presets, AllPresentAndValid) {
  const auto names = preset_names(kConfigDir);
  const std::vector<std::string> expect{"ginzburg-landau", "ginzburg-landau-01", "kdv-cyl",
                                        "kdv-q",           "nse-vorticity",      "phi42-expl",
                                        "phi42-reno",      "wave"};
  EXPECT_EQ(names, expect);
  for (const auto& n : names) {
    const RunConfig c = preset(n);
    EXPECT_EQ(c.name, n);
    EXPECT_EQ(c.samples, 1200u) << n;
    EXPECT_EQ(c.task, Task::Xi) << n;
    EXPECT_EQ(c.kappa, 0.0) << n;
    EXPECT_NO_THROW(c.validate()) << n;
  }
}

TEST(Presets, GinzburgLandauTable) {
  for (const auto& [name, sigma, variant] :
       {std::tuple{"ginzburg-landau", 1.0, "1"}, std::tuple{"ginzburg-landau-01", 0.1, "01"}}) {
    const RunConfig c = preset(name);
    const auto& e = c.equation;
    EXPECT_EQ(e.equation, Equation::GinzburgLandau);
    EXPECT_FALSE(e.grid.two_d);
    EXPECT_EQ(e.grid.nx, 128u);
    EXPECT_DOUBLE_EQ(e.grid.lx, 1.0);
    EXPECT_DOUBLE_EQ(e.T, 0.05);
    EXPECT_EQ(e.n_steps, 50u);
    EXPECT_EQ(e.n_saved(), 50u);
    EXPECT_DOUBLE_EQ(e.sigma, sigma);
    EXPECT_DOUBLE_EQ(e.gl_reaction, 3.0);
    EXPECT_EQ(c.variant, variant);
    EXPECT_EQ(c.J, (std::vector<int>{32, 64, 128, 256}));
    EXPECT_EQ(c.noise.spectrum.kind, SpectrumKind::Identity);
  }
}

TEST(Presets, KdVTable) {
  const RunConfig cyl = preset("kdv-cyl");
  EXPECT_EQ(cyl.equation.equation, Equation::KdV);
  EXPECT_EQ(cyl.equation.grid.nx, 128u);
  EXPECT_DOUBLE_EQ(cyl.equation.T, 0.5);
  EXPECT_EQ(cyl.equation.n_steps, 50u);
  EXPECT_DOUBLE_EQ(cyl.equation.sigma, 0.5);
  EXPECT_DOUBLE_EQ(cyl.equation.kdv_viscosity, 1e-3);
  EXPECT_DOUBLE_EQ(cyl.equation.kdv_gamma, 0.1);
  EXPECT_DOUBLE_EQ(cyl.equation.kdv_nonlinearity, 6.0);
  EXPECT_EQ(cyl.noise.spectrum.kind, SpectrumKind::Identity);
  EXPECT_EQ(cyl.variant, "cyl");

  const RunConfig q = preset("kdv-q");
  EXPECT_DOUBLE_EQ(q.equation.sigma, 1.0);
  EXPECT_EQ(q.noise.spectrum.kind, SpectrumKind::PolyDecay1D);
  EXPECT_DOUBLE_EQ(q.noise.spectrum.r, 2.0);
  EXPECT_DOUBLE_EQ(q.noise.spectrum.eps, 1e-3);
  EXPECT_EQ(q.variant, "Q");
  // Inherited unchanged.
  EXPECT_EQ(q.equation.n_steps, cyl.equation.n_steps);
  EXPECT_EQ(q.equation.kdv_substeps, cyl.equation.kdv_substeps);
}

TEST(Presets, WaveTable) {
  const RunConfig c = preset("wave");
  EXPECT_EQ(c.equation.equation, Equation::Wave);
  EXPECT_EQ(c.equation.grid.nx, 128u);
  EXPECT_DOUBLE_EQ(c.equation.T, 0.5);
  EXPECT_EQ(c.equation.n_steps, 500u);
  EXPECT_EQ(c.equation.save_stride, 5u);
  EXPECT_EQ(c.equation.n_saved(), 100u);
  EXPECT_DOUBLE_EQ(c.equation.sigma, 1.0);
}

TEST(Presets, NavierStokesTable) {
  const RunConfig c = preset("nse-vorticity");
  const auto& e = c.equation;
  EXPECT_EQ(e.equation, Equation::NSEVorticity);
  EXPECT_TRUE(e.grid.two_d);
  EXPECT_EQ(e.grid.nx, 64u);
  EXPECT_DOUBLE_EQ(e.T, 1.0);
  EXPECT_EQ(e.n_steps, 1000u);
  EXPECT_EQ(e.save_stride, 10u);
  EXPECT_EQ(c.x_stride, 4u);
  EXPECT_DOUBLE_EQ(e.sigma, 0.005);
  EXPECT_DOUBLE_EQ(e.nse_nu, 1e-4);
  EXPECT_DOUBLE_EQ(e.nse_forcing, 0.1);
  EXPECT_EQ(c.noise.spectrum.kind, SpectrumKind::GaussDecay2D);
  EXPECT_DOUBLE_EQ(c.noise.spectrum.alpha, 0.005);
  EXPECT_EQ(c.noise.trajectories, 10);
  EXPECT_EQ(c.basis(32).kind, BasisKind::ComplexExp2D);
}

TEST(Presets, Phi42Table) {
  const RunConfig reno = preset("phi42-reno");
  const RunConfig expl = preset("phi42-expl");
  for (const RunConfig* c : {&reno, &expl}) {
    const auto& e = c->equation;
    EXPECT_EQ(e.equation, Equation::Phi42);
    EXPECT_EQ(e.grid.nx, 32u);
    EXPECT_EQ(e.grid.ny, 32u);
    EXPECT_DOUBLE_EQ(e.T, 0.025);
    EXPECT_EQ(e.n_steps, 250u);
    EXPECT_DOUBLE_EQ(e.sigma, 0.1);
    EXPECT_EQ(c->J, (std::vector<int>{2, 8, 32, 64, 128}));
    EXPECT_TRUE(c->has_a_eps_column());
    EXPECT_EQ(c->column_names(), (std::vector<std::string>{"xi", "u", "a_eps"}));
  }
  EXPECT_EQ(reno.method, Method::Renormalized);
  EXPECT_EQ(expl.method, Method::Explicit);
  // Coupled noise requires the two methods to share their seeds.
  EXPECT_EQ(reno.seed, expl.seed);
}

TEST(Presets, DistinctSeedsAcrossEquations) {
  std::set<std::uint64_t> seeds;
  for (const auto& n : {"ginzburg-landau", "kdv-cyl", "wave", "nse-vorticity", "phi42-reno"})
    seeds.insert(preset(n).seed);
  EXPECT_EQ(seeds.size(), 5u);
}

TEST(Overrides, MergeAndRevalidate) {
  const RunConfig c = preset("wave", {{"samples", 4}, {"J", 16}, {"time", {{"steps", 250}}}});
  EXPECT_EQ(c.samples, 4u);
  EXPECT_EQ(c.J, (std::vector<int>{16}));
  EXPECT_EQ(c.equation.n_steps, 250u);
  EXPECT_DOUBLE_EQ(c.equation.T, 0.5);  // sibling keys survive the merge
  EXPECT_THROW(preset("wave", {{"time", {{"steps", 251}}}}), InvalidArgument);
  EXPECT_THROW(preset("no-such-preset"), InvalidArgument);
}

TEST(Overrides, U0XiTaskNeedsKappa) {
  EXPECT_THROW(preset("ginzburg-landau", {{"task", "u0_xi"}}), InvalidArgument);
  const RunConfig c = preset("ginzburg-landau", {{"task", "u0_xi"}, {"kappa", 0.1}});
  EXPECT_TRUE(c.has_u0_column());
  EXPECT_EQ(c.column_names(), (std::vector<std::string>{"xi", "u", "u0"}));
  EXPECT_THROW(preset("ginzburg-landau", {{"kappa", 0.1}}), InvalidArgument);
  EXPECT_THROW(preset("nse-vorticity", {{"kappa", 0.1}}), InvalidArgument);
  EXPECT_NO_THROW(preset("nse-vorticity", {{"task", "u0_xi"}}));
}

TEST(Validation, RejectsUnknownKeysAtEveryLevel) {
  EXPECT_THROW(preset("wave", {{"colour", "red"}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"time", {{"dt", 0.1}}}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"noise", {{"kind", "x"}}}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"coefficients", {{"viscosity", 1.0}}}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"domain", {{"width", 1.0}}}}), InvalidArgument);
}

TEST(Validation, RuleViolations) {
  EXPECT_THROW(preset("wave", {{"J", json::array()}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"samples", 0}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"workers", 0}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"x_stride", 3}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"sigma", -1.0}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"method", "reno"}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"noise", {{"basis", "complex-exp"}}}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"noise", {{"spectrum", "gauss-decay"}}}}), InvalidArgument);
  EXPECT_THROW(preset("wave", {{"time", {{"steps", 50}}}}), InvalidArgument);  // CFL
  EXPECT_THROW(preset("phi42-reno", {{"time", {{"steps", 100}}}}), InvalidArgument);
  EXPECT_THROW(preset("phi42-reno", {{"variant", "expl"}}), InvalidArgument);
  EXPECT_THROW(preset("phi42-reno", {{"noise", {{"trajectories", 2}}}}), InvalidArgument);
  EXPECT_THROW(preset("phi42-reno", {{"method", nullptr}}), InvalidArgument);
  EXPECT_THROW(preset("phi42-reno", {{"a_eps", "vector"}}), InvalidArgument);
  EXPECT_THROW(preset("kdv-cyl", {{"coefficients", {{"kdv_cfl", -1.0}}}}), InvalidArgument);
  EXPECT_THROW(preset("nse-vorticity", {{"noise", {{"spectrum", "poly-decay"}}}}),
               InvalidArgument);
  EXPECT_THROW(preset("nse-vorticity", {{"J", 31}}), InvalidArgument);  // odd complex basis
  EXPECT_THROW(preset("ginzburg-landau", {{"J", 5000}}), ResourceLimitError);
}

TEST(Files, InheritanceAndErrors) {
  test::TempDir dir;
  test::write_file(dir / "base.json",
                   R"({"name": "base", "equation": "ginzburg-landau", "J": [8], "samples": 3,
                       "coefficients": {"gl_reaction": 2.0}})");
  test::write_file(dir / "child.json",
                   R"({"inherits": "base", "name": "child", "sigma": 0.5,
                       // comments are allowed
                       "coefficients": {"nonlinear_scale": 0.5}})");
  test::write_file(dir / "grandchild.json", R"({"inherits": "child.json", "samples": 7})");
  const RunConfig c = load_run_config(dir / "grandchild.json");
  EXPECT_EQ(c.name, "child");
  EXPECT_EQ(c.samples, 7u);
  EXPECT_DOUBLE_EQ(c.equation.sigma, 0.5);
  EXPECT_DOUBLE_EQ(c.equation.gl_reaction, 2.0);
  EXPECT_DOUBLE_EQ(c.equation.nonlinear_scale, 0.5);
  EXPECT_FALSE(resolve_config_json(dir / "grandchild.json").contains("inherits"));

  test::write_file(dir / "loop.json", R"({"inherits": "loop"})");
  EXPECT_THROW(load_run_config(dir / "loop.json"), InvalidArgument);
  test::write_file(dir / "broken.json", "{ not json");
  EXPECT_THROW(load_run_config(dir / "broken.json"), InvalidArgument);
  test::write_file(dir / "noeq.json", R"({"name": "x"})");
  EXPECT_THROW(load_run_config(dir / "noeq.json"), InvalidArgument);
  EXPECT_THROW(load_run_config(dir / "absent.json"), InvalidArgument);
}

TEST(Files, JsonRoundTripForEveryPreset) {
  for (const auto& n : preset_names(kConfigDir)) {
    const RunConfig c = preset(n);
    const json doc = c.to_json();
    EXPECT_FALSE(doc.contains("inherits"));
    const RunConfig back = run_config_from_json(doc);
    EXPECT_EQ(back.to_json(), doc) << n;
  }
}

TEST(Files, ConfigDirFromEnvironment) {
  ::setenv("SPDEGEN_CONFIG_DIR", "/tmp/somewhere", 1);
  EXPECT_EQ(default_config_dir(), std::filesystem::path("/tmp/somewhere"));
  ::unsetenv("SPDEGEN_CONFIG_DIR");
  EXPECT_TRUE(std::filesystem::exists(default_config_dir() / "wave.json"));
}

TEST(Methods, Names) {
  EXPECT_EQ(method_from_string("reno"), Method::Renormalized);
  EXPECT_EQ(method_from_string("expl"), Method::Explicit);
  EXPECT_THROW(method_from_string("implicit"), InvalidArgument);
}
