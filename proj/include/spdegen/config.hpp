#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdegen/dataset.hpp"
#include "spdegen/initcond.hpp"
#include "spdegen/noise.hpp"
#include "spdegen/solvers.hpp"

namespace spdegen {

/// Phi42 generation method.
enum class Method { Renormalized, Explicit };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// Whether the a_eps column holds the spatial mean (broadcast over space)
/// or the full field a(t, x).
enum class AEpsMode { Scalar, Field };

struct NoiseConfig {
  SpectrumSpec spectrum;
  int trajectories = 1;
  std::size_t mode_cap = kDefaultModeCap;
};

/// Everything needed to generate the datasets of one preset.
struct RunConfig {
  std::string name;
  EquationConfig equation;
  NoiseConfig noise;
  /// File-name tag: "01"/"1" for GL, "cyl"/"Q" for KdV, method for Phi42.
  std::string variant;
  Task task = Task::Xi;
  double kappa = 0.0;
  std::vector<int> J;
  std::size_t samples = 1200;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  std::optional<Method> method;
  std::size_t x_stride = 1;
  AEpsMode a_eps = AEpsMode::Scalar;
  std::size_t workers = 1;
  std::size_t batch_size = 32;
  std::filesystem::path output_dir = ".";

  /// Throws InvalidArgument describing the first problem found.
  void validate() const;

  BasisSpec basis(int j) const;
  InitKind init_kind() const;
  bool has_u0_column() const { return task == Task::U0Xi; }
  bool has_a_eps_column() const { return equation.equation == Equation::Phi42; }
  std::vector<std::string> column_names() const;

  /// Fully resolved JSON (no "inherits"); from_json(to_json()) reproduces
  /// the config.
  nlohmann::json to_json() const;
};

/// Builds a config from a resolved document. Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& doc);

/// Reads a JSON document and merges it over its "inherits" chain. A parent
/// is either a preset name looked up as <dir>/<name>.json or a path ending
/// in ".json" relative to the including file.
nlohmann::json resolve_config_json(const std::filesystem::path& file);

RunConfig load_run_config(const std::filesystem::path& file,
                          const nlohmann::json& overrides = nlohmann::json::object());
RunConfig load_preset(const std::string& name, const std::filesystem::path& config_dir,
                      const nlohmann::json& overrides = nlohmann::json::object());

/// $SPDEGEN_CONFIG_DIR if set, else the configs/ directory of the source
/// tree this binary was built from.
std::filesystem::path default_config_dir();

/// Sorted preset names (file stems) in a config directory.
std::vector<std::string> preset_names(const std::filesystem::path& config_dir);

}  // namespace spdegen
