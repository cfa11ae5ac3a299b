#include "spdegen/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "spdegen/error.hpp"

#ifndef SPDEGEN_SOURCE_CONFIG_DIR
#define SPDEGEN_SOURCE_CONFIG_DIR "configs"
#endif

namespace spdegen {

namespace {

using nlohmann::json;

constexpr int kMaxInheritDepth = 16;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!keys.count(k))
      throw InvalidArgument("config: unknown key '" + k + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

std::string spectrum_name(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::Identity:
      return "identity";
    case SpectrumKind::PolyDecay1D:
      return "poly-decay";
    case SpectrumKind::GaussDecay2D:
      return "gauss-decay";
  }
  return "identity";
}

SpectrumKind spectrum_from_string(const std::string& s) {
  if (s == "identity") return SpectrumKind::Identity;
  if (s == "poly-decay") return SpectrumKind::PolyDecay1D;
  if (s == "gauss-decay") return SpectrumKind::GaussDecay2D;
  throw InvalidArgument("config: unknown spectrum '" + s + "'");
}

std::string basis_name(Equation eq) {
  return eq == Equation::NSEVorticity ? "complex-exp" : "sine";
}

json load_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InvalidArgument("config: cannot open " + file.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw InvalidArgument("config: " + file.string() + ": " + e.what());
  }
}

json resolve(const std::filesystem::path& file, int depth) {
  if (depth > kMaxInheritDepth)
    throw InvalidArgument("config: inheritance chain too deep at " + file.string());
  json doc = load_json_file(file);
  if (!doc.is_object()) throw InvalidArgument("config: " + file.string() + " is not an object");
  if (!doc.contains("inherits")) return doc;
  const std::string parent = doc.at("inherits").get<std::string>();
  doc.erase("inherits");
  std::filesystem::path parent_file = file.parent_path() / parent;
  if (parent_file.extension() != ".json") parent_file += ".json";
  json base = resolve(parent_file, depth + 1);
  base.merge_patch(doc);
  return base;
}

}  // namespace

std::string to_string(Method m) { return m == Method::Renormalized ? "reno" : "expl"; }

Method method_from_string(const std::string& name) {
  if (name == "reno") return Method::Renormalized;
  if (name == "expl") return Method::Explicit;
  throw InvalidArgument("unknown method '" + name + "' (expected reno or expl)");
}

BasisSpec RunConfig::basis(int j) const {
  const Grid& g = equation.grid;
  switch (equation.equation) {
    case Equation::NSEVorticity: {
      BasisSpec b = BasisSpec::complex_exp_2d(j, g.lx);
      b.ly = g.ly;
      return b;
    }
    case Equation::Phi42: {
      BasisSpec b = BasisSpec::sine_2d(j, g.lx);
      b.ly = g.ly;
      return b;
    }
    default:
      return BasisSpec::sine_1d(j, g.lx);
  }
}

InitKind RunConfig::init_kind() const {
  switch (equation.equation) {
    case Equation::GinzburgLandau:
      return InitKind::GL;
    case Equation::KdV:
      return InitKind::KdV;
    case Equation::Wave:
      return InitKind::Wave;
    case Equation::Phi42:
      return InitKind::Phi42;
    case Equation::NSEVorticity:
      return task == Task::Xi ? InitKind::NSEGaussian : InitKind::NSEShifted;
  }
  throw InvalidArgument("config: unknown equation");
}

std::vector<std::string> RunConfig::column_names() const {
  std::vector<std::string> names{"xi", "u"};
  if (has_u0_column()) names.push_back("u0");
  if (has_a_eps_column()) names.push_back("a_eps");
  return names;
}

void RunConfig::validate() const {
  equation.validate();
  noise.spectrum.validate();
  if (J.empty()) throw InvalidArgument("config: J list is empty");
  for (int j : J) basis(j).validate(noise.mode_cap);
  if (samples < 1) throw InvalidArgument("config: samples must be >= 1");
  if (workers < 1) throw InvalidArgument("config: workers must be >= 1");
  if (batch_size < 1) throw InvalidArgument("config: batch_size must be >= 1");
  if (noise.trajectories < 1) throw InvalidArgument("config: noise trajectories must be >= 1");
  if (x_stride < 1) throw InvalidArgument("config: x_stride must be >= 1");
  const Grid& g = equation.grid;
  if (g.nx % x_stride != 0 || (g.two_d && g.ny % x_stride != 0))
    throw InvalidArgument("config: x_stride must divide the grid");
  if (!(kappa >= 0.0)) throw InvalidArgument("config: kappa must be >= 0");

  const Equation eq = equation.equation;
  if (eq == Equation::NSEVorticity) {
    if (kappa != 0.0)
      throw InvalidArgument("config: NSE varies its initial condition through task, not kappa");
  } else if (task == Task::Xi && kappa != 0.0) {
    throw InvalidArgument("config: task xi uses a fixed initial condition (kappa = 0)");
  } else if (task == Task::U0Xi && kappa == 0.0) {
    throw InvalidArgument("config: task u0_xi needs kappa > 0");
  }

  if (eq == Equation::Phi42) {
    if (!method) throw InvalidArgument("config: Phi42 needs a method (reno or expl)");
    if (variant != to_string(*method))
      throw InvalidArgument("config: Phi42 variant must equal the method tag");
    if (noise.spectrum.kind != SpectrumKind::Identity)
      throw InvalidArgument("config: Phi42 uses cylindrical (identity) noise");
    if (noise.trajectories != 1)
      throw InvalidArgument("config: Phi42 uses a single noise trajectory");
  } else if (method) {
    throw InvalidArgument("config: method applies to Phi42 only");
  }
  if (eq == Equation::NSEVorticity && noise.spectrum.kind == SpectrumKind::PolyDecay1D)
    throw InvalidArgument("config: poly-decay spectrum is one-dimensional");
  if (eq != Equation::NSEVorticity && noise.spectrum.kind == SpectrumKind::GaussDecay2D)
    throw InvalidArgument("config: gauss-decay spectrum applies to the NSE basis");
}

json RunConfig::to_json() const {
  const EquationConfig& e = equation;
  json doc;
  doc["name"] = name;
  doc["equation"] = to_string(e.equation);
  doc["variant"] = variant;
  doc["task"] = to_string(task);
  doc["kappa"] = kappa;
  doc["J"] = J;
  doc["samples"] = samples;
  doc["seed"] = seed;
  doc["split_seed"] = split_seed;
  if (method) doc["method"] = to_string(*method);
  doc["domain"] = {{"length", e.grid.lx}, {"points", e.grid.nx}};
  doc["time"] = {{"T", e.T}, {"steps", e.n_steps}, {"t_stride", e.save_stride}};
  doc["x_stride"] = x_stride;
  doc["sigma"] = e.sigma;
  doc["noise"] = {{"basis", basis_name(e.equation)},
                  {"spectrum", spectrum_name(noise.spectrum.kind)},
                  {"r", noise.spectrum.r},
                  {"eps", noise.spectrum.eps},
                  {"alpha", noise.spectrum.alpha},
                  {"trajectories", noise.trajectories},
                  {"mode_cap", noise.mode_cap}};
  doc["coefficients"] = {{"gl_reaction", e.gl_reaction},
                         {"kdv_viscosity", e.kdv_viscosity},
                         {"kdv_gamma", e.kdv_gamma},
                         {"kdv_nonlinearity", e.kdv_nonlinearity},
                         {"kdv_substeps", e.kdv_substeps},
                         {"kdv_cfl", e.kdv_cfl},
                         {"nse_nu", e.nse_nu},
                         {"nse_forcing", e.nse_forcing},
                         {"nse_project_mean", e.nse_project_mean},
                         {"nonlinear_scale", e.nonlinear_scale},
                         {"divergence_bound", e.divergence_bound}};
  doc["a_eps"] = a_eps == AEpsMode::Scalar ? "scalar" : "field";
  doc["workers"] = workers;
  doc["batch_size"] = batch_size;
  doc["output_dir"] = output_dir.string();
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"name", "equation", "variant", "task", "kappa", "J", "samples", "seed",
                  "split_seed", "method", "domain", "time", "x_stride", "sigma", "noise",
                  "coefficients", "a_eps", "workers", "batch_size", "output_dir",
                  "description"},
                 "run config");
  if (!doc.contains("equation")) throw InvalidArgument("config: 'equation' is required");

  RunConfig c;
  c.equation = EquationConfig::preset(equation_from_string(doc.at("equation").get<std::string>()));
  EquationConfig& e = c.equation;
  read(doc, "name", c.name);
  read(doc, "variant", c.variant);
  if (doc.contains("task")) c.task = task_from_string(doc.at("task").get<std::string>());
  read(doc, "kappa", c.kappa);
  if (doc.contains("J")) {
    const json& j = doc.at("J");
    if (j.is_number_integer()) c.J = {j.get<int>()};
    else read(doc, "J", c.J);
  }
  read(doc, "samples", c.samples);
  read(doc, "seed", c.seed);
  read(doc, "split_seed", c.split_seed);
  if (doc.contains("method")) c.method = method_from_string(doc.at("method").get<std::string>());
  read(doc, "x_stride", c.x_stride);
  read(doc, "sigma", e.sigma);
  read(doc, "workers", c.workers);
  read(doc, "batch_size", c.batch_size);
  if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
  if (doc.contains("a_eps")) {
    const auto mode = doc.at("a_eps").get<std::string>();
    if (mode == "scalar") c.a_eps = AEpsMode::Scalar;
    else if (mode == "field") c.a_eps = AEpsMode::Field;
    else throw InvalidArgument("config: a_eps must be scalar or field");
  }

  if (doc.contains("domain")) {
    const json& d = doc.at("domain");
    reject_unknown(d, {"length", "points"}, "domain");
    double length = e.grid.lx;
    std::size_t points = e.grid.nx;
    read(d, "length", length);
    read(d, "points", points);
    e.grid = e.grid.two_d ? Grid::square(points, length) : Grid::line(points, length);
  }
  if (doc.contains("time")) {
    const json& t = doc.at("time");
    reject_unknown(t, {"T", "steps", "t_stride"}, "time");
    read(t, "T", e.T);
    read(t, "steps", e.n_steps);
    read(t, "t_stride", e.save_stride);
  }
  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    reject_unknown(n, {"basis", "spectrum", "r", "eps", "alpha", "trajectories", "mode_cap"},
                   "noise");
    if (n.contains("basis") && n.at("basis").get<std::string>() != basis_name(e.equation))
      throw InvalidArgument("config: " + to_string(e.equation) + " uses the '" +
                            basis_name(e.equation) + "' basis");
    if (n.contains("spectrum"))
      c.noise.spectrum.kind = spectrum_from_string(n.at("spectrum").get<std::string>());
    read(n, "r", c.noise.spectrum.r);
    read(n, "eps", c.noise.spectrum.eps);
    read(n, "alpha", c.noise.spectrum.alpha);
    read(n, "trajectories", c.noise.trajectories);
    read(n, "mode_cap", c.noise.mode_cap);
  }
  if (doc.contains("coefficients")) {
    const json& k = doc.at("coefficients");
    reject_unknown(k,
                   {"gl_reaction", "kdv_viscosity", "kdv_gamma", "kdv_nonlinearity",
                    "kdv_substeps", "kdv_cfl", "nse_nu", "nse_forcing", "nse_project_mean",
                    "nonlinear_scale", "divergence_bound"},
                   "coefficients");
    read(k, "gl_reaction", e.gl_reaction);
    read(k, "kdv_viscosity", e.kdv_viscosity);
    read(k, "kdv_gamma", e.kdv_gamma);
    read(k, "kdv_nonlinearity", e.kdv_nonlinearity);
    read(k, "kdv_substeps", e.kdv_substeps);
    read(k, "kdv_cfl", e.kdv_cfl);
    read(k, "nse_nu", e.nse_nu);
    read(k, "nse_forcing", e.nse_forcing);
    read(k, "nse_project_mean", e.nse_project_mean);
    read(k, "nonlinear_scale", e.nonlinear_scale);
    read(k, "divergence_bound", e.divergence_bound);
  }
  c.validate();
  return c;
}

json resolve_config_json(const std::filesystem::path& file) { return resolve(file, 0); }

RunConfig load_run_config(const std::filesystem::path& file, const json& overrides) {
  json doc = resolve_config_json(file);
  doc.merge_patch(overrides);
  return run_config_from_json(doc);
}

RunConfig load_preset(const std::string& name, const std::filesystem::path& config_dir,
                      const json& overrides) {
  const auto file = config_dir / (name + ".json");
  if (!std::filesystem::exists(file))
    throw InvalidArgument("config: no preset '" + name + "' in " + config_dir.string());
  return load_run_config(file, overrides);
}

std::filesystem::path default_config_dir() {
  if (const char* env = std::getenv("SPDEGEN_CONFIG_DIR"); env && *env) return env;
  return SPDEGEN_SOURCE_CONFIG_DIR;
}

std::vector<std::string> preset_names(const std::filesystem::path& config_dir) {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(config_dir, ec))
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  if (ec) throw InvalidArgument("config: cannot list " + config_dir.string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace spdegen
