#include "spdegen/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "spdegen/dataset.hpp"
#include "spdegen/error.hpp"
#include "spdegen/initcond.hpp"
#include "spdegen/renorm.hpp"
#include "spdegen/rng.hpp"
#include "spdegen/solvers.hpp"

namespace spdegen {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

// Runs fn(i) for i in [0, n) on up to `workers` threads. Indices are
// handed out in increasing order; fn must only touch per-index state.
// Returns the number of indices whose fn completed before `stop` was seen,
// counted as a contiguous prefix.
std::size_t parallel_for(std::size_t n, std::size_t workers,
                         const std::function<void(std::size_t)>& fn,
                         const std::atomic<bool>* stop = nullptr) {
  std::atomic<std::size_t> next{0};
  std::vector<char> done(n, 0);
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      if (stop && stop->load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
        done[i] = 1;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(workers, n));
  if (threads == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
  std::size_t prefix = 0;
  while (prefix < n && done[prefix]) ++prefix;
  return prefix;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Trajectory white_noise_slices(const RunConfig& cfg, const NoisePath& noise) {
  const EquationConfig& e = cfg.equation;
  Trajectory xi(e.grid, e.n_saved());
  const double inv_dt = 1.0 / noise.dt;
  for (std::size_t s = 0; s < xi.n_slices(); ++s) {
    const std::size_t n = s * e.save_stride;
    xi.times[s] = static_cast<double>(n) * e.dt();
    const auto src = noise.slice(n);
    auto dst = xi.slice(s);
    for (std::size_t m = 0; m < src.size(); ++m) dst[m] = src[m] * inv_dt;
  }
  return xi;
}

void append_as_float(std::vector<float>& dst, std::span<const double> src) {
  for (double v : src) dst.push_back(static_cast<float>(v));
}

json failure_json(const FailureRecord& f) {
  return {{"index", f.index}, {"seed", f.seed}, {"step", f.step}, {"message", f.message}};
}

FailureRecord failure_from_json(const json& j) {
  return {j.at("index").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
          j.at("step").get<std::size_t>(), j.at("message").get<std::string>()};
}

// Fields that identify the generated data; run-time knobs (workers,
// output directory, batch size) may change between a run and its resume.
json identity_json(const RunConfig& cfg) {
  json j = cfg.to_json();
  j.erase("workers");
  j.erase("output_dir");
  j.erase("batch_size");
  return j;
}

std::vector<double> saved_times(const RunConfig& cfg) {
  const EquationConfig& e = cfg.equation;
  std::vector<double> t;
  for (std::size_t s = 0; s < e.n_saved(); ++s)
    t.push_back(static_cast<double>(s * e.save_stride) * e.dt());
  return t;
}

std::vector<double> a_eps_saved_means(const RunConfig& cfg, const Trajectory& a) {
  std::vector<double> out;
  for (std::size_t s = 0; s < cfg.equation.n_saved(); ++s) {
    const auto slice = a.slice(s * cfg.equation.save_stride);
    double m = 0.0;
    for (double v : slice) m += v;
    out.push_back(m / static_cast<double>(slice.size()));
  }
  return out;
}

json dataset_metadata(const RunConfig& cfg, int J, const std::vector<std::size_t>& indices,
                      const std::vector<std::uint64_t>& noise_seeds,
                      const std::vector<FailureRecord>& failures, const Trajectory* a_series,
                      bool complete, bool omit_timestamp) {
  const EquationConfig& e = cfg.equation;
  json m;
  m["format_version"] = kFormatVersion;
  m["equation"] = to_string(e.equation);
  m["variant"] = cfg.variant;
  m["task"] = to_string(cfg.task);
  m["J"] = J;
  m["sigma"] = e.sigma;
  m["kappa"] = cfg.kappa;
  if (cfg.method) m["method"] = to_string(*cfg.method);
  m["samples_requested"] = cfg.samples;
  m["samples_written"] = indices.size();
  m["seed"] = cfg.seed;
  m["split_seed"] = cfg.split_seed;
  m["split"] = {{"train", 0.70}, {"valid", 0.15}, {"test", 0.15},
                {"algorithm", "fisher-yates over philox uniforms"}};
  m["seed_derivation"] = {
      {"child", "derive_seed(seed, [fnv1a(equation), sample_index])"},
      {"noise", "derive_seed(child, [fnv1a(\"noise\")])"},
      {"init", "derive_seed(child, [fnv1a(\"init\")])"},
      {"nse_base", "derive_seed(seed, [fnv1a(\"nse-base\")])"}};
  m["sample_indices"] = indices;
  m["noise_seeds"] = noise_seeds;
  json f = json::array();
  for (const auto& fr : failures) f.push_back(failure_json(fr));
  m["failures"] = f;
  m["dims_order"] = e.grid.two_d ? json{"N", "T", "X", "Y"} : json{"N", "T", "X"};
  m["layout"] = "row-major, N outermost; float32";
  m["times"] = saved_times(cfg);
  json cols = {{"xi", "white-noise increments dW/dt (unscaled by sigma)"},
               {"u", "solution"}};
  if (cfg.has_u0_column()) cols["u0"] = "initial condition broadcast over T";
  if (cfg.has_a_eps_column())
    cols["a_eps"] = cfg.a_eps == AEpsMode::Scalar
                        ? "renormalisation constant, spatial mean broadcast over X, Y"
                        : "renormalisation constant field a(t, x)";
  m["columns"] = cols;
  if (a_series) {
    m["a_eps_mode"] = cfg.a_eps == AEpsMode::Scalar ? "scalar" : "field";
    m["a_eps_series"] = a_eps_saved_means(cfg, *a_series);
  }
  m["schemes"] = {{"rng", "philox4x32-10 + box-muller, v1"},
                  {"noise", "counter per (step, mode, trajectory), v1"},
                  {"solver", to_string(e.equation) + ", v1"}};
  m["config"] = cfg.to_json();
  m["complete"] = complete;
  if (!omit_timestamp) m["generated_at"] = utc_timestamp();
  return m;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

SampleSeeds sample_seeds(const RunConfig& cfg, std::size_t index) {
  SampleSeeds s;
  s.child = derive_seed(cfg.seed, {tag_hash(to_string(cfg.equation.equation)), index});
  s.noise = derive_seed(s.child, {tag_hash("noise")});
  s.init = derive_seed(s.child, {tag_hash("init")});
  return s;
}

std::uint64_t nse_base_seed(const RunConfig& cfg) {
  return derive_seed(cfg.seed, {tag_hash("nse-base")});
}

SampleOutput simulate_sample(const RunConfig& cfg, int J, std::size_t index,
                             std::optional<Method> method, const Trajectory* a_series) {
  const EquationConfig& e = cfg.equation;
  const SampleSeeds seeds = sample_seeds(cfg, index);
  NoisePath noise = sample_path(cfg.basis(J), cfg.noise.spectrum, e.n_steps, e.dt(), e.grid,
                                seeds.noise, cfg.noise.trajectories, cfg.noise.mode_cap);
  const InitSpec spec{cfg.init_kind(), cfg.kappa, seeds.init, nse_base_seed(cfg)};
  InitialState init = make_initial(spec, e.grid);

  SampleOutput out;
  switch (e.equation) {
    case Equation::GinzburgLandau:
      out.u = solve_ginzburg_landau(init.u0, noise, e);
      break;
    case Equation::KdV:
      out.u = solve_kdv(init.u0, noise, e);
      break;
    case Equation::Wave:
      out.u = solve_wave(init.u0, *init.v0, noise, e);
      break;
    case Equation::NSEVorticity:
      out.u = solve_nse_vorticity(init.u0, noise, e);
      break;
    case Equation::Phi42: {
      const Method m = method ? *method : cfg.method.value_or(Method::Explicit);
      if (m == Method::Renormalized) {
        out.u = renormalized_bundle(init.u0, noise, e, a_series).u;
      } else {
        out.u = solve_phi42_explicit(init.u0, noise, e);
      }
      break;
    }
  }
  out.noise = std::move(noise);
  out.u0 = std::move(init.u0);
  out.noise_seed = seeds.noise;
  return out;
}

std::vector<std::size_t> sample_dims(const RunConfig& cfg) {
  const Grid& g = cfg.equation.grid;
  std::vector<std::size_t> d{cfg.equation.n_saved(), g.nx / cfg.x_stride};
  if (g.two_d) d.push_back(g.ny / cfg.x_stride);
  return d;
}

std::vector<std::vector<float>> sample_columns(const RunConfig& cfg, const SampleOutput& out,
                                               const Trajectory* a_series) {
  const EquationConfig& e = cfg.equation;
  const std::size_t xs = cfg.x_stride;
  std::vector<std::vector<float>> cols;

  const Trajectory xi = downsample(white_noise_slices(cfg, out.noise), 1, xs);
  const Trajectory u = downsample(out.u, 1, xs);
  cols.emplace_back();
  append_as_float(cols.back(), xi.values);
  cols.emplace_back();
  append_as_float(cols.back(), u.values);

  if (cfg.has_u0_column()) {
    Trajectory one(e.grid, 1);
    std::copy(out.u0.values.begin(), out.u0.values.end(), one.values.begin());
    const Trajectory small = downsample(one, 1, xs);
    cols.emplace_back();
    for (std::size_t s = 0; s < u.n_slices(); ++s) append_as_float(cols.back(), small.values);
  }
  if (cfg.has_a_eps_column()) {
    if (!a_series) throw InvalidArgument("sample_columns: Phi42 needs the a_eps series");
    cols.emplace_back();
    auto& col = cols.back();
    const std::size_t pts = u.grid.points();
    if (cfg.a_eps == AEpsMode::Scalar) {
      for (double m : a_eps_saved_means(cfg, *a_series)) col.insert(col.end(), pts, static_cast<float>(m));
    } else {
      Trajectory strided(e.grid, e.n_saved());
      for (std::size_t s = 0; s < e.n_saved(); ++s) {
        const auto src = a_series->slice(s * e.save_stride);
        std::copy(src.begin(), src.end(), strided.slice(s).begin());
      }
      append_as_float(col, downsample(strided, 1, xs).values);
    }
  }
  return cols;
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path) {
  auto p = dataset_path;
  p += ".manifest.json";
  return p;
}

std::filesystem::path partial_path(const std::filesystem::path& dataset_path) {
  auto p = dataset_path;
  p += ".partial";
  return p;
}

GenerateReport generate(const RunConfig& cfg, const GenerateOptions& options) {
  cfg.validate();
  const EquationConfig& e = cfg.equation;
  std::filesystem::create_directories(cfg.output_dir);
  const auto names = cfg.column_names();
  const auto dims = sample_dims(cfg);

  GenerateReport report;
  for (int J : cfg.J) {
    FileReport fr;
    fr.J = J;
    fr.path = cfg.output_dir /
              dataset_file_name(e.equation, cfg.variant, cfg.task, J, cfg.samples);
    const auto partial = partial_path(fr.path);
    const auto manifest = manifest_path(fr.path);

    if (options.resume && std::filesystem::exists(fr.path) &&
        !std::filesystem::exists(manifest)) {
      fr.skipped = true;
      fr.complete = true;
      fr.written = read_parquet_header(fr.path).dims.at(0);
      report.files.push_back(std::move(fr));
      continue;
    }

    std::optional<Trajectory> a_series;
    if (e.equation == Equation::Phi42) a_series = renorm_constant_series(J, e);
    const Trajectory* a_ptr = a_series ? &*a_series : nullptr;

    std::size_t start = 0;
    std::vector<std::size_t> kept;
    std::vector<std::uint64_t> kept_seeds;
    std::optional<DatasetRecord> previous;
    if (options.resume && std::filesystem::exists(manifest)) {
      std::ifstream in(manifest);
      json mf = json::parse(in);
      if (mf.at("identity") != identity_json(cfg) || mf.at("J").get<int>() != J)
        throw InvalidArgument("resume: manifest " + manifest.string() +
                              " was written for a different configuration");
      start = mf.at("next_index").get<std::size_t>();
      kept = mf.at("sample_indices").get<std::vector<std::size_t>>();
      kept_seeds = mf.at("noise_seeds").get<std::vector<std::uint64_t>>();
      for (const auto& f : mf.at("failures")) fr.failures.push_back(failure_from_json(f));
      previous = read_parquet(partial);
      if (previous->dims.at(0) != kept.size())
        throw SchemaError("resume: partial file disagrees with its manifest");
    }

    DatasetWriter writer(partial, names, dims);
    if (previous && !kept.empty()) writer.append(previous->columns, kept.size());
    previous.reset();

    while (start < cfg.samples) {
      if (options.stop && options.stop->load()) break;
      const std::size_t b = std::min(cfg.batch_size, cfg.samples - start);
      std::vector<std::vector<std::vector<float>>> results(b);
      std::vector<std::optional<FailureRecord>> failed(b);
      std::vector<std::uint64_t> seeds(b);
      const std::size_t prefix = parallel_for(
          b, cfg.workers,
          [&](std::size_t k) {
            const std::size_t index = start + k;
            try {
              const SampleOutput out = simulate_sample(cfg, J, index, std::nullopt, a_ptr);
              seeds[k] = out.noise_seed;
              results[k] = sample_columns(cfg, out, a_ptr);
            } catch (const DivergenceError& err) {
              failed[k] = FailureRecord{index, sample_seeds(cfg, index).noise, err.step(),
                                        err.what()};
            }
          },
          options.stop);

      std::vector<std::vector<float>> batch(names.size());
      std::size_t ok = 0;
      for (std::size_t k = 0; k < prefix; ++k) {
        if (failed[k]) {
          fr.failures.push_back(*failed[k]);
          continue;
        }
        for (std::size_t c = 0; c < names.size(); ++c)
          batch[c].insert(batch[c].end(), results[k][c].begin(), results[k][c].end());
        kept.push_back(start + k);
        kept_seeds.push_back(seeds[k]);
        ++ok;
      }
      writer.append(batch, ok);
      start += prefix;
      if (options.progress) options.progress(J, start, cfg.samples);
      if (prefix < b) break;
    }

    fr.written = kept.size();
    fr.complete = start >= cfg.samples;
    writer.finish(dataset_metadata(cfg, J, kept, kept_seeds, fr.failures, a_ptr, fr.complete,
                                   options.omit_timestamp));
    if (fr.complete) {
      std::filesystem::rename(partial, fr.path);
      std::filesystem::rename(sidecar_path(partial), sidecar_path(fr.path));
      std::filesystem::remove(manifest);
      report.files.push_back(std::move(fr));
      continue;
    }

    json mf;
    mf["identity"] = identity_json(cfg);
    mf["J"] = J;
    mf["next_index"] = start;
    mf["sample_indices"] = kept;
    mf["noise_seeds"] = kept_seeds;
    json f = json::array();
    for (const auto& x : fr.failures) f.push_back(failure_json(x));
    mf["failures"] = f;
    mf["partial_file"] = partial.filename().string();
    write_json_file(manifest, mf);
    report.files.push_back(std::move(fr));
    report.interrupted = true;
    break;
  }
  return report;
}

Phi42Samples run_phi42_samples(const RunConfig& cfg, Method method, int J, std::size_t n,
                               std::size_t t_index, std::size_t workers) {
  const EquationConfig& e = cfg.equation;
  if (e.equation != Equation::Phi42)
    throw InvalidArgument("run_phi42_samples: config is not a Phi42 preset");
  if (t_index >= e.n_saved())
    throw InvalidArgument("run_phi42_samples: t_index " + std::to_string(t_index) +
                          " outside 0.." + std::to_string(e.n_saved() - 1));
  std::optional<Trajectory> a_series;
  if (method == Method::Renormalized) a_series = renorm_constant_series(J, e);

  Phi42Samples out;
  out.method = method;
  out.J = J;
  out.t_index = t_index;
  out.seeds.resize(n);
  out.fields.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const SampleOutput s =
        simulate_sample(cfg, J, i, method, a_series ? &*a_series : nullptr);
    out.seeds[i] = s.noise_seed;
    out.fields[i] = s.u.field(t_index);
  });
  return out;
}

Phi42Comparison compare_phi42(const Phi42Samples& a, const Phi42Samples& b, double k_cut) {
  if (a.J != b.J) throw InvalidArgument("compare_phi42: truncation degrees differ");
  if (a.t_index != b.t_index) throw InvalidArgument("compare_phi42: time indices differ");
  if (a.seeds != b.seeds) throw InvalidArgument("compare_phi42: seed sets differ");
  if (a.fields.empty()) throw InvalidArgument("compare_phi42: no samples");

  const Grid& g = a.fields.front().grid;
  RunningStats sa(g.points()), sb(g.points());
  std::vector<double> paired;
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    sa.add(a.fields[i].values);
    sb.add(b.fields[i].values);
    paired.push_back(relative_l2(a.fields[i], b.fields[i]));
  }
  Phi42Comparison c;
  c.J = a.J;
  c.t_index = a.t_index;
  c.samples = a.fields.size();
  c.mean_a = Field(g);
  c.mean_a.values = sa.finish().mean;
  c.mean_b = Field(g);
  c.mean_b.values = sb.finish().mean;
  c.hf_fraction_a = high_freq_energy_fraction(c.mean_a, k_cut);
  c.hf_fraction_b = high_freq_energy_fraction(c.mean_b, k_cut);
  c.mean_relative_l2 = relative_l2(c.mean_a, c.mean_b);
  c.paired = ErrorReport::from(std::move(paired));
  return c;
}

nlohmann::json Phi42Comparison::to_json() const {
  return {{"J", J},
          {"t_index", t_index},
          {"samples", samples},
          {"hf_fraction_reno", hf_fraction_a},
          {"hf_fraction_expl", hf_fraction_b},
          {"mean_field_relative_l2", mean_relative_l2},
          {"paired_relative_l2", {{"mean", paired.mean}, {"stddev", paired.stddev},
                                  {"count", paired.count}}}};
}

std::string Phi42Comparison::grid_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "x,y,mean_reno,mean_expl\n";
  const Grid& g = mean_a.grid;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j)
      os << g.x(i) << ',' << g.y(j) << ',' << mean_a(i, j) << ',' << mean_b(i, j) << '\n';
  return os.str();
}

BenchResult bench_preset(const RunConfig& cfg, int J, std::size_t repeats, std::size_t warmup) {
  if (repeats == 0) throw InvalidArgument("bench: repeats must be >= 1");
  std::optional<Trajectory> a_series;
  if (cfg.equation.equation == Equation::Phi42 && cfg.method == Method::Renormalized)
    a_series = renorm_constant_series(J, cfg.equation);
  BenchResult r;
  r.label = cfg.name.empty() ? to_string(cfg.equation.equation) : cfg.name;
  r.label += " J=" + std::to_string(J);
  r.timing = time_solver(
      [&](std::size_t i) {
        (void)simulate_sample(cfg, J, i, std::nullopt, a_series ? &*a_series : nullptr);
      },
      repeats, warmup);
  return r;
}

std::vector<BenchResult> bench_phi42(const RunConfig& cfg, int J, std::size_t repeats,
                                     std::size_t warmup) {
  if (cfg.equation.equation != Equation::Phi42)
    throw InvalidArgument("bench_phi42: config is not a Phi42 preset");
  RunConfig reno = cfg, expl = cfg;
  reno.method = Method::Renormalized;
  reno.variant = "reno";
  reno.name = "phi42-reno";
  expl.method = Method::Explicit;
  expl.variant = "expl";
  expl.name = "phi42-expl";
  RunConfig expl2 = expl;
  expl2.equation.n_steps *= 2;
  expl2.name = "phi42-expl(2 N_t)";

  std::vector<BenchResult> out;
  out.push_back(bench_preset(reno, J, repeats, warmup));
  out.push_back(bench_preset(expl, J, repeats, warmup));
  out.push_back(bench_preset(expl2, J, repeats, warmup));
  return out;
}

}  // namespace spdegen
