// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "spdegen/config.hpp"
#include "spdegen/dataset.hpp"
#include "spdegen/metrics.hpp"
#include "spdegen/pipeline.hpp"
#include "spdegen/renorm.hpp"
#include "spdegen/validation.hpp"

using namespace spdegen;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigDir = SPDEGEN_TEST_CONFIG_DIR;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
  void require(const CheckResult& r) {
    detail << " " << r.name << "=" << std::setprecision(3) << r.value;
    if (!r.passed) {
      passed = false;
      detail << " [failed: threshold " << r.threshold << ", " << r.detail << "]";
    }
  }
  void require(const std::vector<CheckResult>& rs) {
    for (const auto& r : rs) require(r);
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("spdegen-acceptance-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

GenerateOptions no_timestamp() {
  GenerateOptions o;
  o.omit_timestamp = true;
  return o;
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

Outcome noise_statistics() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  o.require(check_noise_variance(10000, 12345));
  const double dt = seconds_since(t0);
  o.detail << " runtime=" << std::setprecision(3) << dt << "s";
  o.require(dt < 10.0, "runtime < 10 s");
  return o;
}

Outcome preset_fidelity() {
  Outcome o;
  struct Row {
    const char* name;
    Equation eq;
    std::size_t points;
    double T;
    std::size_t steps;
    double sigma;
    std::vector<int> J;
  };
  const std::vector<int> J1{32, 64, 128, 256}, J2{2, 8, 32, 64, 128};
  const std::vector<Row> table{
      {"ginzburg-landau", Equation::GinzburgLandau, 128, 0.05, 50, 1.0, J1},
      {"ginzburg-landau-01", Equation::GinzburgLandau, 128, 0.05, 50, 0.1, J1},
      {"kdv-cyl", Equation::KdV, 128, 0.5, 50, 0.5, J1},
      {"kdv-q", Equation::KdV, 128, 0.5, 50, 1.0, J1},
      {"wave", Equation::Wave, 128, 0.5, 500, 1.0, J1},
      {"nse-vorticity", Equation::NSEVorticity, 64, 1.0, 1000, 0.005, J1},
      {"phi42-reno", Equation::Phi42, 32, 0.025, 250, 0.1, J2},
      {"phi42-expl", Equation::Phi42, 32, 0.025, 250, 0.1, J2},
  };
  for (const auto& row : table) {
    const RunConfig c = load_preset(row.name, kConfigDir);
    const auto& e = c.equation;
    const bool ok = e.equation == row.eq && e.grid.nx == row.points &&
                    e.grid.lx == 1.0 && e.T == row.T && e.n_steps == row.steps &&
                    e.sigma == row.sigma && c.J == row.J && c.samples == 1200;
    o.require(ok, row.name);
  }
  o.detail << " presets=" << table.size();
  return o;
}

Outcome deterministic_limits() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  o.require(check_wave_standing_wave());
  o.require(check_kdv_linear_mode());
  o.require(check_nse_single_mode());
  o.require(check_phi42_constant_ode());
  o.require(check_gl_linear_growth());
  const double dt = seconds_since(t0);
  o.detail << " runtime=" << std::setprecision(3) << dt << "s";
  o.require(dt < 120.0, "runtime < 2 min");
  return o;
}

Outcome self_convergence() {
  Outcome o;
  o.require(check_kdv_self_convergence());
  o.require(check_nse_self_convergence());
  o.require(check_time_orders());
  return o;
}

Outcome wick_correctness() {
  Outcome o;
  o.require(check_wick_centering(10000, 2024));
  o.require(check_wick_identities(7));
  return o;
}

Outcome renormalization_constant() {
  Outcome o;
  o.require(check_renorm_monotone());
  const auto cfg = EquationConfig::preset(Equation::Phi42);
  bool zero = true;
  for (int J : {1, 2, 8, 128})
    for (double v : renorm_constant(J, 0.0, cfg).values) zero = zero && v == 0.0;
  o.require(zero, "a(0) == 0 exactly");
  o.require(check_ou_variance(10000, 99));
  return o;
}

Outcome high_frequency_suppression() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load_preset("phi42-reno", kConfigDir);
  const std::size_t n = 300, t_index = cfg.equation.n_saved() - 1;
  const auto reno = run_phi42_samples(cfg, Method::Renormalized, 128, n, t_index);
  const auto expl = run_phi42_samples(cfg, Method::Explicit, 128, n, t_index);
  const auto cmp = compare_phi42(reno, expl, 8.0);
  const double dt = seconds_since(t0);
  o.detail << std::setprecision(4) << " hf_reno=" << cmp.hf_fraction_a
           << " hf_expl=" << cmp.hf_fraction_b << " mean_rel_l2=" << cmp.mean_relative_l2
           << " runtime=" << std::setprecision(3) << dt << "s";
  o.require(cmp.hf_fraction_a < cmp.hf_fraction_b, "reno fraction < expl fraction");
  o.require(dt < 1800.0, "runtime < 30 min");
  return o;
}

Outcome dataset_round_trip() {
  Outcome o;
  TempDir dir("roundtrip");
  std::size_t files = 0;
  for (const auto& name : preset_names(kConfigDir)) {
    RunConfig cfg = load_preset(name, kConfigDir,
                                {{"samples", 2}, {"output_dir", dir.path().string()}});
    const auto report = generate(cfg, no_timestamp());
    for (const auto& f : report.files) {
      ++files;
      const std::string expect = dataset_file_name(cfg.equation.equation, cfg.variant,
                                                   cfg.task, f.J, 2);
      o.require(f.complete && f.path.filename() == expect, "name " + expect);
      o.require(f.failures.empty(), "no diverged samples in " + expect);
    }
    // Bitwise check of the first file against freshly simulated samples.
    const int J = cfg.J.front();
    const auto rec = read_parquet(report.files.front().path);
    std::optional<Trajectory> a;
    if (cfg.equation.equation == Equation::Phi42) a = renorm_constant_series(J, cfg.equation);
    std::vector<std::vector<float>> cols(cfg.column_names().size());
    for (std::size_t i = 0; i < 2; ++i) {
      const auto s = sample_columns(cfg, simulate_sample(cfg, J, i, std::nullopt, a ? &*a : nullptr),
                                    a ? &*a : nullptr);
      for (std::size_t c = 0; c < cols.size(); ++c)
        cols[c].insert(cols[c].end(), s[c].begin(), s[c].end());
    }
    std::vector<std::size_t> dims{2};
    for (auto d : sample_dims(cfg)) dims.push_back(d);
    o.require(rec.dims == dims, name + " dims");
    for (std::size_t c = 0; c < cols.size(); ++c) {
      o.require(same_bits(rec.columns[c], cols[c]), name + " column " + rec.names[c]);
      // Widened to double, the tensor view must reshape back onto the same values.
      const Tensor t = rec.tensor(rec.names[c]);
      const Tensor back = reshape(flatten(t), t.shape);
      bool same = back.shape == dims;
      for (std::size_t i = 0; same && i < cols[c].size(); ++i)
        same = static_cast<float>(back.data[i]) == cols[c][i];
      o.require(same, name + " reshape of " + rec.names[c]);
    }
  }
  o.detail << " files=" << files;
  return o;
}

Outcome end_to_end_determinism() {
  Outcome o;
  for (const char* name : {"ginzburg-landau", "kdv-q", "phi42-reno"}) {
    TempDir a(std::string("det-a-") + name), b(std::string("det-b-") + name);
    const json small = {{"samples", 4}, {"J", {32}}};
    RunConfig ca = load_preset(name, kConfigDir, small), cb = ca;
    ca.output_dir = a.path();
    cb.output_dir = b.path();
    cb.workers = 2;  // scheduling must not leak into the data
    const auto ra = generate(ca, no_timestamp());
    const auto rb = generate(cb, no_timestamp());
    const auto da = read_parquet(ra.files.front().path);
    const auto db = read_parquet(rb.files.front().path);
    bool same = da.dims == db.dims && da.names == db.names;
    for (std::size_t c = 0; same && c < da.columns.size(); ++c)
      same = same_bits(da.columns[c], db.columns[c]);
    o.require(same, name);
  }
  o.detail << " presets=3";
  return o;
}

Outcome benchmark_sanity() {
  Outcome o;
  const RunConfig cfg = load_preset("phi42-reno", kConfigDir);
  const auto r = bench_phi42(cfg, 128, 5, 1);
  const double reno = r[0].timing.median, expl = r[1].timing.median, expl2 = r[2].timing.median;
  o.detail << std::setprecision(4) << " reno_ms=" << reno * 1e3 << " expl_ms=" << expl * 1e3
           << " expl_2Nt/expl=" << expl2 / expl;
  o.require(reno > expl, "reno slower than expl");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"noise statistics", noise_statistics},
      {"preset fidelity", preset_fidelity},
      {"deterministic-limit solvers", deterministic_limits},
      {"self-convergence and orders", self_convergence},
      {"Wick correctness", wick_correctness},
      {"renormalization constant", renormalization_constant},
      {"high-frequency suppression", high_frequency_suppression},
      {"dataset round-trip", dataset_round_trip},
      {"end-to-end determinism", end_to_end_determinism},
      {"benchmark sanity", benchmark_sanity},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    all = all && o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << (i + 1) << " ("
              << criteria[i].first << "):" << o.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
