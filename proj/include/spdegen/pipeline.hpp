#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdegen/config.hpp"
#include "spdegen/grid.hpp"
#include "spdegen/metrics.hpp"
#include "spdegen/noise.hpp"

namespace spdegen {

/// Seeds of one sample. The child seed hashes (master seed, equation
/// family, sample index); noise and initial-condition seeds are derived
/// from it with distinct tags. J and the Phi42 method are deliberately not
/// hashed, so datasets at different J and both Phi42 methods see coupled
/// noise.
struct SampleSeeds {
  std::uint64_t child = 0;
  std::uint64_t noise = 0;
  std::uint64_t init = 0;
};

SampleSeeds sample_seeds(const RunConfig& cfg, std::size_t index);

/// Seed of the fixed NSE Gaussian random field shared by all samples.
std::uint64_t nse_base_seed(const RunConfig& cfg);

struct SampleOutput {
  Trajectory u;        // at solver resolution, every t_stride-th step
  NoisePath noise;     // full-resolution increments
  Field u0;
  std::uint64_t noise_seed = 0;
};

/// Draws noise and initial condition for sample `index` and solves.
/// `a_series` (Phi42 reno only) is the precomputed renorm_constant_series.
SampleOutput simulate_sample(const RunConfig& cfg, int J, std::size_t index,
                             std::optional<Method> method = std::nullopt,
                             const Trajectory* a_series = nullptr);

/// Values of one sample in the dataset layout, one vector per column of
/// cfg.column_names(), each of length T * X (* Y) after downsampling.
std::vector<std::vector<float>> sample_columns(const RunConfig& cfg,
                                               const SampleOutput& out,
                                               const Trajectory* a_series);

/// Dims (T, X[, Y]) of one stored sample.
std::vector<std::size_t> sample_dims(const RunConfig& cfg);

struct FailureRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t step = 0;
  std::string message;
};

struct FileReport {
  std::filesystem::path path;
  int J = 0;
  std::size_t written = 0;
  std::vector<FailureRecord> failures;
  bool complete = false;
  bool skipped = false;  // already present when resuming
};

struct GenerateReport {
  std::vector<FileReport> files;
  bool interrupted = false;
};

struct GenerateOptions {
  /// Continue interrupted runs from their manifests and skip finished files.
  bool resume = false;
  /// Set asynchronously (for example by a SIGINT handler) to stop after the
  /// samples in flight.
  const std::atomic<bool>* stop = nullptr;
  /// Omit the wall-clock timestamp from the metadata.
  bool omit_timestamp = false;
  std::function<void(int J, std::size_t done, std::size_t total)> progress;
};

/// Generates one file per J value of the config. Files are written as
/// "<name>.partial" and renamed when complete; an interrupted run leaves
/// the partial file and "<name>.manifest.json" behind.
GenerateReport generate(const RunConfig& cfg, const GenerateOptions& options = {});

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path);
std::filesystem::path partial_path(const std::filesystem::path& dataset_path);

/// Fields of one Phi42 method at a fixed saved time index, one per sample.
struct Phi42Samples {
  Method method = Method::Explicit;
  int J = 0;
  std::size_t t_index = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<Field> fields;
};

/// Runs samples 0..n-1 of a Phi42 config with the given method and keeps
/// the saved slice `t_index` of each.
Phi42Samples run_phi42_samples(const RunConfig& cfg, Method method, int J,
                               std::size_t n, std::size_t t_index,
                               std::size_t workers = 1);

struct Phi42Comparison {
  int J = 0;
  std::size_t t_index = 0;
  std::size_t samples = 0;
  Field mean_a;
  Field mean_b;
  double hf_fraction_a = 0.0;
  double hf_fraction_b = 0.0;
  /// relative_l2(mean_a, mean_b).
  double mean_relative_l2 = 0.0;
  /// relative_l2(a_i, b_i) per sample.
  ErrorReport paired;

  nlohmann::json to_json() const;
  /// x,y,mean_a,mean_b rows for external plotting.
  std::string grid_csv() const;
};

/// Throws InvalidArgument when J, t_index or the seed lists differ.
Phi42Comparison compare_phi42(const Phi42Samples& a, const Phi42Samples& b,
                              double k_cut = 8.0);

struct BenchResult {
  std::string label;
  TimingReport timing;
};

/// Per-sample wall time of the Phi42 solvers (reno and expl) at J, plus
/// the explicit solver at 2 n_steps for the linear-work check.
std::vector<BenchResult> bench_phi42(const RunConfig& cfg, int J, std::size_t repeats,
                                     std::size_t warmup = 1);

/// Per-sample wall time of the config's own solver at J.
BenchResult bench_preset(const RunConfig& cfg, int J, std::size_t repeats,
                         std::size_t warmup = 1);

}  // namespace spdegen
