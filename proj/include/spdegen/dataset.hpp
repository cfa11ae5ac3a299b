#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdegen/grid.hpp"
#include "spdegen/solvers.hpp"

namespace spdegen {

namespace parquet {
class Writer;
}

/// Dense row-major array with the first axis outermost.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t size() const;
};

std::size_t shape_size(std::span<const std::size_t> shape);

/// Row-major flattening (first axis outermost). For a Tensor this is the
/// storage order itself, so the copy is returned unchanged.
std::vector<double> flatten(const Tensor& t);

/// Inverse of flatten(); throws InvalidArgument if the sizes disagree.
Tensor reshape(std::vector<double> flat, std::vector<std::size_t> shape);

/// Stacks trajectories of one grid and slice count into shape
/// (N, T, X) or (N, T, X, Y).
Tensor stack(std::span<const Trajectory> samples);

/// Keeps every t_stride-th slice and every x_stride-th grid point along
/// each spatial axis, starting at index 0. No filtering is applied.
Trajectory downsample(const Trajectory& traj, std::size_t t_stride,
                      std::size_t x_stride);

/// Learning task: "xi" maps noise to solution with a fixed initial
/// condition; "u0_xi" also varies the initial condition per sample.
enum class Task { Xi, U0Xi };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

/// Tag joined to the equation name in file names: "01"/"1" (GL sigma),
/// "cyl"/"Q" (KdV noise), "reno"/"expl" (Phi42 method), or empty.
std::string dataset_file_name(Equation eq, const std::string& variant, Task task,
                              int J, std::size_t samples);

/// Columns of float32 values that all share `dims`, plus free-form
/// metadata. dims is (N, T, X) for 1D data and (N, T, X, Y) for 2D data.
struct DatasetRecord {
  std::vector<std::size_t> dims;
  std::vector<std::string> names;
  std::vector<std::vector<float>> columns;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t column_length() const { return shape_size(dims); }
  /// Throws SchemaError if any column length differs from prod(dims).
  void validate() const;
  const std::vector<float>& column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  /// Column values widened to double and reshaped to dims.
  Tensor tensor(const std::string& name) const;
};

/// Path of the human-readable metadata file written next to `parquet_path`.
std::filesystem::path sidecar_path(const std::filesystem::path& parquet_path);

/// Writes the Parquet file (columns plus key-value metadata holding dims
/// and the JSON metadata) and the sidecar JSON.
void write_parquet(const DatasetRecord& record, const std::filesystem::path& path);

/// Reads a file written by write_parquet(). Missing or malformed dims or
/// metadata, or a column length mismatch, raise SchemaError.
DatasetRecord read_parquet(const std::filesystem::path& path);

/// Reads only the stored dims and metadata.
DatasetRecord read_parquet_header(const std::filesystem::path& path);

/// Incremental writer: each append() becomes one row group holding a
/// batch of whole samples. finish() records dims with the final sample
/// count and writes the sidecar.
class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, std::vector<std::string> names,
                std::vector<std::size_t> sample_dims);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  /// `columns[c]` holds `n_samples` samples of column c back to back.
  void append(const std::vector<std::vector<float>>& columns, std::size_t n_samples);
  void finish(nlohmann::json metadata);

  std::size_t samples_written() const { return samples_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::vector<std::string> names_;
  std::vector<std::size_t> sample_dims_;
  std::size_t per_sample_;
  std::size_t samples_ = 0;
  std::unique_ptr<parquet::Writer> writer_;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

/// Seeded permutation of 0..n-1 cut 70/15/15 (train and valid sizes
/// rounded to nearest, test takes the rest).
Split split_indices(std::size_t n, std::uint64_t split_seed);

}  // namespace spdegen
