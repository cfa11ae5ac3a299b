// Command-line front end: generate, validate, compare-phi42, bench, inspect.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spdegen/config.hpp"
#include "spdegen/dataset.hpp"
#include "spdegen/error.hpp"
#include "spdegen/pipeline.hpp"
#include "spdegen/validation.hpp"

namespace {

using nlohmann::json;
using namespace spdegen;

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfigError = 2,
  kDivergence = 3,
  kValidationFailed = 4,
  kInterrupted = 130,
};

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) {
  g_stop.store(true);
  std::signal(SIGINT, SIG_DFL);
}

struct ConfigArgs {
  std::string preset;
  std::string file;
  std::string config_dir;
  std::vector<int> J;
  std::optional<std::size_t> samples;
  std::optional<double> sigma;
  std::optional<double> kappa;
  std::string task;
  std::string method;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> batch_size;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& a, bool require_source) {
  auto* src = cmd->add_option_group("source");
  src->add_option("-p,--preset", a.preset, "preset name (file stem in the config directory)");
  src->add_option("-c,--config", a.file, "run-config JSON file");
  if (require_source) src->require_option(1);
  else src->require_option(0, 1);
  cmd->add_option("--config-dir", a.config_dir,
                  "preset directory (default $SPDEGEN_CONFIG_DIR or the source configs/)");
  cmd->add_option("-J,--J", a.J, "truncation degree(s), overriding the config list");
  cmd->add_option("-n,--samples", a.samples, "number of samples per file");
  cmd->add_option("--sigma", a.sigma, "noise scale");
  cmd->add_option("--kappa", a.kappa, "initial-condition perturbation scale");
  cmd->add_option("--task", a.task, "xi (fixed u0) or u0_xi (varying u0)")
      ->check(CLI::IsMember({"xi", "u0_xi"}));
  cmd->add_option("--method", a.method, "Phi42 method: reno or expl")
      ->check(CLI::IsMember({"reno", "expl"}));
  cmd->add_option("--seed", a.seed, "master seed");
  cmd->add_option("-o,--output", a.output,
                  "output directory (default $SPDEGEN_OUTPUT_DIR, then the config value)");
  cmd->add_option("-w,--workers", a.workers, "worker threads");
  cmd->add_option("--batch-size", a.batch_size, "samples per row group");
}

json overrides_from(const ConfigArgs& a) {
  json o = json::object();
  if (!a.J.empty()) o["J"] = a.J;
  if (a.samples) o["samples"] = *a.samples;
  if (a.sigma) o["sigma"] = *a.sigma;
  if (a.kappa) o["kappa"] = *a.kappa;
  if (!a.task.empty()) o["task"] = a.task;
  if (!a.method.empty()) {
    o["method"] = a.method;
    o["variant"] = a.method;
  }
  if (a.seed) o["seed"] = *a.seed;
  if (a.workers) o["workers"] = *a.workers;
  if (a.batch_size) o["batch_size"] = *a.batch_size;
  if (!a.output.empty()) {
    o["output_dir"] = a.output;
  } else if (const char* env = std::getenv("SPDEGEN_OUTPUT_DIR"); env && *env) {
    o["output_dir"] = env;
  }
  return o;
}

std::optional<RunConfig> load_config(const ConfigArgs& a) {
  const auto dir = a.config_dir.empty() ? default_config_dir() : std::filesystem::path(a.config_dir);
  const json o = overrides_from(a);
  if (!a.preset.empty()) return load_preset(a.preset, dir, o);
  if (!a.file.empty()) return load_run_config(a.file, o);
  return std::nullopt;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

int run_generate(const ConfigArgs& a, bool resume, bool no_timestamp, bool quiet) {
  const RunConfig cfg = *load_config(a);
  GenerateOptions opt;
  opt.resume = resume;
  opt.stop = &g_stop;
  opt.omit_timestamp = no_timestamp;
  if (!quiet)
    opt.progress = [](int J, std::size_t done, std::size_t total) {
      std::cerr << "J=" << J << ": " << done << "/" << total << " samples\r" << std::flush;
    };
  std::signal(SIGINT, on_sigint);
  const GenerateReport report = generate(cfg, opt);
  std::signal(SIGINT, SIG_DFL);
  if (!quiet) std::cerr << '\n';

  bool total_failure = false;
  for (const auto& f : report.files) {
    std::cout << (f.complete ? (f.skipped ? "skipped " : "wrote   ") : "partial ")
              << f.path.string() << "  (J=" << f.J << ", " << f.written << " samples";
    if (!f.failures.empty()) std::cout << ", " << f.failures.size() << " diverged";
    std::cout << ")\n";
    for (const auto& fail : f.failures)
      std::cout << "  diverged: sample " << fail.index << " seed " << fail.seed << " at step "
                << fail.step << '\n';
    if (f.complete && f.written == 0) total_failure = true;
  }
  if (report.interrupted) {
    std::cout << "interrupted; rerun with --resume to continue\n";
    return kInterrupted;
  }
  return total_failure ? kDivergence : kOk;
}

int run_validate(const ConfigArgs& a, std::size_t paths, std::uint64_t seed, bool no_conv,
                 const std::string& json_out) {
  const std::optional<RunConfig> cfg = load_config(a);
  ValidationOptions opt;
  opt.paths = paths;
  opt.seed = seed;
  opt.convergence = !no_conv;
  const auto results = run_validation(opt, cfg);
  std::cout << to_table(results);
  if (!json_out.empty()) write_text(json_out, to_json(results).dump(2) + "\n");
  return all_passed(results) ? kOk : kValidationFailed;
}

int run_compare(ConfigArgs a, std::optional<std::size_t> t_index, double k_cut) {
  if (a.preset.empty() && a.file.empty()) a.preset = "phi42-reno";
  if (a.J.size() > 1) throw InvalidArgument("compare-phi42 takes a single J");
  const int J = a.J.empty() ? 128 : a.J.front();
  const RunConfig cfg = *load_config(a);
  if (cfg.equation.equation != Equation::Phi42)
    throw InvalidArgument("compare-phi42 needs a Phi42 config");
  const std::size_t t = t_index.value_or(cfg.equation.n_saved() - 1);
  const Phi42Samples reno =
      run_phi42_samples(cfg, Method::Renormalized, J, cfg.samples, t, cfg.workers);
  const Phi42Samples expl =
      run_phi42_samples(cfg, Method::Explicit, J, cfg.samples, t, cfg.workers);
  const Phi42Comparison c = compare_phi42(reno, expl, k_cut);
  std::filesystem::create_directories(cfg.output_dir);
  const auto stem = cfg.output_dir / ("compare-phi42-J" + std::to_string(J));
  json report = c.to_json();
  report["k_cut"] = k_cut;
  write_text(stem.string() + ".json", report.dump(2) + "\n");
  write_text(stem.string() + ".csv", c.grid_csv());
  std::cout << std::setprecision(6) << "J=" << J << " t_index=" << t << " samples=" << c.samples
            << "\n  high-frequency fraction (|k| > " << k_cut << "): reno " << c.hf_fraction_a
            << ", expl " << c.hf_fraction_b << "\n  relative L2 between mean fields: "
            << c.mean_relative_l2 << "\n  paired relative L2: " << c.paired.mean << " +- "
            << c.paired.stddev << "\n  wrote " << stem.string() << ".{json,csv}\n";
  return kOk;
}

int run_bench(ConfigArgs a, std::size_t repeats, std::size_t warmup,
              const std::string& json_out) {
  if (a.preset.empty() && a.file.empty()) a.preset = "phi42-reno";
  const RunConfig cfg = *load_config(a);
  const int j = cfg.J.back();
  std::vector<BenchResult> results;
  if (cfg.equation.equation == Equation::Phi42) results = bench_phi42(cfg, j, repeats, warmup);
  else results.push_back(bench_preset(cfg, j, repeats, warmup));

  json out = json::array();
  std::cout << std::left << std::setw(28) << "solver" << std::setw(14) << "mean ms"
            << std::setw(14) << "median ms" << "stddev ms\n";
  for (const auto& r : results) {
    std::cout << std::setw(28) << r.label << std::setw(14) << r.timing.mean * 1e3
              << std::setw(14) << r.timing.median * 1e3;
    if (r.timing.stddev) std::cout << *r.timing.stddev * 1e3;
    else std::cout << "-";
    std::cout << '\n';
    json row = {{"solver", r.label}, {"seconds", r.timing.seconds},
                {"mean", r.timing.mean}, {"median", r.timing.median}};
    if (r.timing.stddev) row["stddev"] = *r.timing.stddev;
    out.push_back(row);
  }
  if (!json_out.empty()) write_text(json_out, out.dump(2) + "\n");
  return kOk;
}

int run_inspect(const std::string& file, bool full) {
  const DatasetRecord rec = read_parquet_header(file);
  std::cout << "file:    " << file << "\ndims:    [";
  for (std::size_t i = 0; i < rec.dims.size(); ++i)
    std::cout << (i ? ", " : "") << rec.dims[i];
  std::cout << "]  (" << (rec.dims.size() == 4 ? "N, T, X, Y" : "N, T, X") << ")\ncolumns:";
  for (const auto& n : rec.names) std::cout << ' ' << n;
  std::cout << '\n';
  if (full) {
    std::cout << rec.metadata.dump(2) << '\n';
    return kOk;
  }
  for (const char* key : {"equation", "variant", "task", "J", "sigma", "kappa", "method",
                          "seed", "split_seed", "samples_written", "complete", "generated_at"})
    if (rec.metadata.contains(key)) std::cout << std::setw(9) << std::left << (std::string(key) + ":") << ' '
                                               << rec.metadata.at(key).dump() << '\n';
  if (rec.metadata.contains("failures"))
    std::cout << "failures: " << rec.metadata.at("failures").size() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spdegen: stochastic PDE dataset generator"};
  app.require_subcommand(1);

  ConfigArgs gen_args, val_args, cmp_args, bench_args;
  bool resume = false, no_timestamp = false, quiet = false;
  auto* gen = app.add_subcommand("generate", "generate dataset files for a preset");
  add_config_flags(gen, gen_args, true);
  gen->add_flag("--resume", resume, "continue an interrupted run from its manifest");
  gen->add_flag("--no-timestamp", no_timestamp, "omit the generation time from metadata");
  gen->add_flag("-q,--quiet", quiet, "no progress output");

  std::size_t paths = 10000;
  std::uint64_t val_seed = 12345;
  bool no_conv = false;
  std::string val_json;
  auto* val = app.add_subcommand("validate", "run the numerical property checks");
  add_config_flags(val, val_args, false);
  val->add_option("--paths", paths, "Monte-Carlo paths per statistical check");
  val->add_option("--mc-seed", val_seed, "seed of the Monte-Carlo checks");
  val->add_flag("--no-convergence", no_conv, "skip self-convergence and order checks");
  val->add_option("--json", val_json, "write the report as JSON");

  std::optional<std::size_t> t_index;
  double k_cut = 8.0;
  auto* cmp = app.add_subcommand("compare-phi42", "compare renormalised and explicit Phi42 means");
  add_config_flags(cmp, cmp_args, false);
  cmp->add_option("--t-index", t_index, "saved time index (default: last)");
  cmp->add_option("--k-cut", k_cut, "wavenumber cut for the high-frequency fraction");

  std::size_t repeats = 5, warmup = 1;
  std::string bench_json;
  auto* bench = app.add_subcommand("bench", "time the solvers per sample");
  add_config_flags(bench, bench_args, false);
  bench->add_option("--repeats", repeats, "timed samples");
  bench->add_option("--warmup", warmup, "discarded samples");
  bench->add_option("--json", bench_json, "write the report as JSON");

  std::string inspect_file;
  bool inspect_full = false;
  auto* inspect = app.add_subcommand("inspect", "print dims and metadata of a dataset file");
  inspect->add_option("file", inspect_file, "Parquet file")->required();
  inspect->add_flag("--full", inspect_full, "print the full metadata JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) return run_generate(gen_args, resume, no_timestamp, quiet);
    if (*val) return run_validate(val_args, paths, val_seed, no_conv, val_json);
    if (*cmp) return run_compare(cmp_args, t_index, k_cut);
    if (*bench) return run_bench(bench_args, repeats, warmup, bench_json);
    if (*inspect) return run_inspect(inspect_file, inspect_full);
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ResourceLimitError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
