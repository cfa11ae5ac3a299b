#include "spdegen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "spdegen/error.hpp"
#include "spdegen/parquet.hpp"
#include "spdegen/rng.hpp"

namespace spdegen {

namespace {

constexpr const char* kDimsKey = "spdegen.dims";
constexpr const char* kColumnsKey = "spdegen.columns";
constexpr const char* kMetadataKey = "spdegen.metadata";

std::string spde_name(Equation eq) {
  switch (eq) {
    case Equation::GinzburgLandau:
      return "Phi41";
    case Equation::KdV:
      return "KdV";
    case Equation::Wave:
      return "Wave";
    case Equation::NSEVorticity:
      return "NS";
    case Equation::Phi42:
      return "Phi42";
  }
  throw InvalidArgument("dataset: unknown equation");
}

std::vector<parquet::KeyValue> header_kv(const std::vector<std::size_t>& dims,
                                         const std::vector<std::string>& names,
                                         const nlohmann::json& metadata) {
  return {{kDimsKey, nlohmann::json(dims).dump()},
          {kColumnsKey, nlohmann::json(names).dump()},
          {kMetadataKey, metadata.dump()}};
}

void write_sidecar(const std::filesystem::path& parquet_path,
                   const std::vector<std::size_t>& dims,
                   const std::vector<std::string>& names,
                   const nlohmann::json& metadata) {
  nlohmann::json doc;
  // An in-progress ".partial" file is named after its final destination.
  auto file = parquet_path.filename();
  if (file.extension() == ".partial") file.replace_extension();
  doc["file"] = file.string();
  doc["dims"] = dims;
  doc["columns"] = names;
  doc["layout"] = "row-major, N outermost then T, X, Y; float32";
  doc["metadata"] = metadata;
  const auto path = sidecar_path(parquet_path);
  std::ofstream out(path);
  if (!out) throw IoError("dataset: cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("dataset: write failed for " + path.string());
}

DatasetRecord header_from_kv(const std::vector<parquet::KeyValue>& kv,
                             const std::filesystem::path& path) {
  DatasetRecord rec;
  bool have_dims = false, have_meta = false;
  try {
    for (const auto& [k, v] : kv) {
      if (k == kDimsKey) {
        rec.dims = nlohmann::json::parse(v).get<std::vector<std::size_t>>();
        have_dims = true;
      } else if (k == kColumnsKey) {
        rec.names = nlohmann::json::parse(v).get<std::vector<std::string>>();
      } else if (k == kMetadataKey) {
        rec.metadata = nlohmann::json::parse(v);
        have_meta = true;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("dataset: malformed metadata in " + path.string() + ": " + e.what());
  }
  if (!have_dims || !have_meta)
    throw SchemaError("dataset: " + path.string() + " lacks dims or metadata");
  if (rec.dims.size() != 3 && rec.dims.size() != 4)
    throw SchemaError("dataset: dims must have 3 or 4 entries in " + path.string());
  return rec;
}

}  // namespace

std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::size_t Tensor::size() const { return shape_size(shape); }

std::vector<double> flatten(const Tensor& t) {
  if (t.data.size() != t.size())
    throw InvalidArgument("flatten: data size does not match shape");
  return t.data;
}

Tensor reshape(std::vector<double> flat, std::vector<std::size_t> shape) {
  if (flat.size() != shape_size(shape))
    throw InvalidArgument("reshape: " + std::to_string(flat.size()) +
                          " values do not fit the requested shape");
  return Tensor{std::move(shape), std::move(flat)};
}

Tensor stack(std::span<const Trajectory> samples) {
  if (samples.empty()) throw InvalidArgument("stack: no samples");
  const Grid& g = samples.front().grid;
  const std::size_t nt = samples.front().n_slices();
  Tensor t;
  t.shape = {samples.size(), nt, g.nx};
  if (g.two_d) t.shape.push_back(g.ny);
  t.data.reserve(t.size());
  for (const auto& s : samples) {
    if (!(s.grid == g) || s.n_slices() != nt)
      throw InvalidArgument("stack: samples differ in grid or slice count");
    t.data.insert(t.data.end(), s.values.begin(), s.values.end());
  }
  return t;
}

Trajectory downsample(const Trajectory& traj, std::size_t t_stride,
                      std::size_t x_stride) {
  const Grid& g = traj.grid;
  if (t_stride == 0 || x_stride == 0)
    throw InvalidArgument("downsample: strides must be positive");
  if (traj.n_slices() % t_stride != 0)
    throw InvalidArgument("downsample: t_stride " + std::to_string(t_stride) +
                          " does not divide " + std::to_string(traj.n_slices()));
  if (g.nx % x_stride != 0 || (g.two_d && g.ny % x_stride != 0))
    throw InvalidArgument("downsample: x_stride " + std::to_string(x_stride) +
                          " does not divide the grid");
  Grid out_grid = g;
  out_grid.nx = g.nx / x_stride;
  if (g.two_d) out_grid.ny = g.ny / x_stride;
  const std::size_t ys = g.two_d ? x_stride : 1;

  Trajectory out(out_grid, traj.n_slices() / t_stride);
  out.noise_seed = traj.noise_seed;
  for (std::size_t n = 0; n < out.n_slices(); ++n) {
    out.times[n] = traj.times[n * t_stride];
    const auto src = traj.slice(n * t_stride);
    auto dst = out.slice(n);
    for (std::size_t i = 0; i < out_grid.nx; ++i)
      for (std::size_t j = 0; j < out_grid.ny; ++j)
        dst[i * out_grid.ny + j] = src[(i * x_stride) * g.ny + j * ys];
  }
  return out;
}

std::string to_string(Task task) { return task == Task::Xi ? "xi" : "u0_xi"; }

Task task_from_string(const std::string& name) {
  if (name == "xi") return Task::Xi;
  if (name == "u0_xi") return Task::U0Xi;
  throw InvalidArgument("unknown task '" + name + "' (expected xi or u0_xi)");
}

std::string dataset_file_name(Equation eq, const std::string& variant, Task task,
                              int J, std::size_t samples) {
  if (J < 1) throw InvalidArgument("dataset name: J must be >= 1");
  if (samples < 1) throw InvalidArgument("dataset name: sample count must be >= 1");
  const std::string j = std::to_string(J), n = std::to_string(samples);
  if (eq == Equation::Phi42) {
    if (variant != "reno" && variant != "expl")
      throw InvalidArgument("dataset name: Phi42 variant must be reno or expl");
    return "Phi42+_" + variant + "_" + to_string(task) + "_eps_" + j + "_" + n + ".parquet";
  }
  std::string spde = spde_name(eq);
  if (!variant.empty()) spde += "_" + variant;
  return spde + "-" + to_string(task) + "-" + j + "-" + n + ".parquet";
}

void DatasetRecord::validate() const {
  if (dims.size() != 3 && dims.size() != 4)
    throw SchemaError("dataset: dims must be (N,T,X) or (N,T,X,Y)");
  if (names.size() != columns.size())
    throw SchemaError("dataset: column names and columns differ in count");
  const std::size_t len = column_length();
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c].size() != len)
      throw SchemaError("dataset: column '" + names[c] + "' has " +
                        std::to_string(columns[c].size()) + " values, dims require " +
                        std::to_string(len));
}

bool DatasetRecord::has_column(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<float>& DatasetRecord::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidArgument("dataset: no column '" + name + "'");
  return columns[static_cast<std::size_t>(it - names.begin())];
}

Tensor DatasetRecord::tensor(const std::string& name) const {
  const auto& col = column(name);
  return reshape(std::vector<double>(col.begin(), col.end()), dims);
}

std::filesystem::path sidecar_path(const std::filesystem::path& parquet_path) {
  auto p = parquet_path;
  p.replace_extension(".json");
  return p;
}

void write_parquet(const DatasetRecord& record, const std::filesystem::path& path) {
  record.validate();
  parquet::Writer w(path, record.names);
  std::vector<std::span<const float>> spans;
  for (const auto& c : record.columns) spans.emplace_back(c);
  w.write_row_group(spans);
  w.close(header_kv(record.dims, record.names, record.metadata));
  write_sidecar(path, record.dims, record.names, record.metadata);
}

DatasetRecord read_parquet_header(const std::filesystem::path& path) {
  return header_from_kv(parquet::read_key_value(path), path);
}

DatasetRecord read_parquet(const std::filesystem::path& path) {
  parquet::Table table = parquet::read_table(path);
  DatasetRecord rec = header_from_kv(table.key_value, path);
  if (rec.names.empty())
    for (const auto& c : table.columns) rec.names.push_back(c.name);
  if (rec.names.size() != table.columns.size())
    throw SchemaError("dataset: column list disagrees with file schema in " + path.string());
  for (std::size_t c = 0; c < rec.names.size(); ++c) {
    if (table.columns[c].name != rec.names[c])
      throw SchemaError("dataset: column order disagrees with file schema in " +
                        path.string());
    rec.columns.push_back(std::move(table.columns[c].values));
  }
  rec.validate();
  return rec;
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path,
                             std::vector<std::string> names,
                             std::vector<std::size_t> sample_dims)
    : path_(path), names_(std::move(names)), sample_dims_(std::move(sample_dims)),
      per_sample_(shape_size(sample_dims_)),
      writer_(std::make_unique<parquet::Writer>(path, names_)) {
  if (sample_dims_.size() != 2 && sample_dims_.size() != 3)
    throw InvalidArgument("dataset writer: sample dims must be (T,X) or (T,X,Y)");
}

DatasetWriter::~DatasetWriter() = default;

void DatasetWriter::append(const std::vector<std::vector<float>>& columns,
                           std::size_t n_samples) {
  if (columns.size() != names_.size())
    throw InvalidArgument("dataset writer: wrong number of columns");
  for (const auto& c : columns)
    if (c.size() != n_samples * per_sample_)
      throw InvalidArgument("dataset writer: column batch has the wrong length");
  if (n_samples == 0) return;
  std::vector<std::span<const float>> spans;
  for (const auto& c : columns) spans.emplace_back(c);
  writer_->write_row_group(spans);
  samples_ += n_samples;
}

void DatasetWriter::finish(nlohmann::json metadata) {
  std::vector<std::size_t> dims{samples_};
  dims.insert(dims.end(), sample_dims_.begin(), sample_dims_.end());
  writer_->close(header_kv(dims, names_, metadata));
  write_sidecar(path_, dims, names_, metadata);
}

Split split_indices(std::size_t n, std::uint64_t split_seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  UniformStream u(derive_seed(split_seed, {tag_hash("split")}));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(u.next() * static_cast<double>(i));
    std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(0.70 * static_cast<double>(n)));
  const auto n_valid = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(0.15 * static_cast<double>(n))));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.valid.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                 perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), perm.end());
  return s;
}

}  // namespace spdegen
