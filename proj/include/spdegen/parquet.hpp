#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spdegen::parquet {

using KeyValue = std::pair<std::string, std::string>;

struct Column {
  std::string name;
  std::vector<float> values;
};

/// In-memory view of a flat Parquet file of required FLOAT columns.
struct Table {
  std::vector<Column> columns;
  std::vector<KeyValue> key_value;
  std::int64_t num_rows = 0;
  std::size_t row_groups = 0;

  const Column* find(const std::string& name) const;
};

/// Streams row groups of required FLOAT columns (PLAIN encoding, no
/// compression) to a file. The footer is written by close(); a writer that
/// is destroyed without close() leaves an invalid file behind.
class Writer {
 public:
  Writer(const std::filesystem::path& path, std::vector<std::string> column_names,
         std::size_t values_per_page = 1u << 20);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  /// One span per column, all of the same length.
  void write_row_group(const std::vector<std::span<const float>>& columns);
  void close(const std::vector<KeyValue>& key_value);

 private:
  struct ChunkInfo {
    std::int64_t offset;
    std::int64_t bytes;
    std::int64_t values;
  };
  struct GroupInfo {
    std::vector<ChunkInfo> chunks;
    std::int64_t rows;
  };

  void put(const std::string& bytes);

  std::filesystem::path path_;
  std::ofstream out_;
  std::vector<std::string> names_;
  std::size_t values_per_page_;
  std::int64_t offset_ = 0;
  std::vector<GroupInfo> groups_;
  bool closed_ = false;
};

void write_table(const std::filesystem::path& path, const Table& table,
                 std::size_t rows_per_group = 0);

/// Reads files with required FLOAT columns stored as uncompressed PLAIN v1
/// data pages. Anything else raises SchemaError; I/O failures raise IoError.
Table read_table(const std::filesystem::path& path);

/// Key-value metadata only.
std::vector<KeyValue> read_key_value(const std::filesystem::path& path);

}  // namespace spdegen::parquet
