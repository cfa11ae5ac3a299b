#include "spdegen/parquet.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <optional>

#include "spdegen/error.hpp"

namespace spdegen::parquet {

namespace {

static_assert(std::endian::native == std::endian::little,
              "parquet PLAIN encoding is little-endian");

constexpr char kMagic[] = "PAR1";

// Thrift compact protocol type ids.
enum CType : std::uint8_t {
  kStop = 0,
  kTrue = 1,
  kFalse = 2,
  kByte = 3,
  kI16 = 4,
  kI32 = 5,
  kI64 = 6,
  kDouble = 7,
  kBinary = 8,
  kList = 9,
  kSet = 10,
  kMap = 11,
  kStruct = 12,
};

// Parquet enum values used here.
constexpr std::int32_t kTypeFloat = 4;
constexpr std::int32_t kRequired = 0;
constexpr std::int32_t kEncodingPlain = 0;
constexpr std::int32_t kEncodingRle = 3;
constexpr std::int32_t kCodecUncompressed = 0;
constexpr std::int32_t kPageData = 0;

class CompactWriter {
 public:
  void begin_struct() { last_.push_back(0); }
  void end_struct() {
    buf_.push_back(static_cast<char>(kStop));
    last_.pop_back();
  }
  void field(std::int16_t id, CType type) {
    const std::int16_t delta = static_cast<std::int16_t>(id - last_.back());
    if (delta > 0 && delta <= 15) {
      buf_.push_back(static_cast<char>((delta << 4) | type));
    } else {
      buf_.push_back(static_cast<char>(type));
      varint(zigzag(id));
    }
    last_.back() = id;
  }
  void i32(std::int16_t id, std::int32_t v) {
    field(id, kI32);
    varint(zigzag(v));
  }
  void i64(std::int16_t id, std::int64_t v) {
    field(id, kI64);
    varint(zigzag(v));
  }
  void string(std::int16_t id, const std::string& s) {
    field(id, kBinary);
    raw_string(s);
  }
  void list(std::int16_t id, CType elem, std::size_t size) {
    field(id, kList);
    list_header(elem, size);
  }
  void list_header(CType elem, std::size_t size) {
    if (size < 15) {
      buf_.push_back(static_cast<char>((size << 4) | elem));
    } else {
      buf_.push_back(static_cast<char>(0xF0 | elem));
      varint(size);
    }
  }
  void raw_i32(std::int32_t v) { varint(zigzag(v)); }
  void raw_string(const std::string& s) {
    varint(s.size());
    buf_ += s;
  }
  const std::string& bytes() const { return buf_; }

 private:
  static std::uint64_t zigzag(std::int64_t v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
  }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      buf_.push_back(static_cast<char>((v & 0x7F) | 0x80));
      v >>= 7;
    }
    buf_.push_back(static_cast<char>(v));
  }

  std::string buf_;
  std::vector<std::int16_t> last_{0};
};

class CompactReader {
 public:
  CompactReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::size_t position() const { return pos_; }

  void begin_struct() { last_.push_back(0); }
  void end_struct() { last_.pop_back(); }

  // Returns false at the struct's stop byte.
  bool field(std::int16_t& id, std::uint8_t& type) {
    const std::uint8_t b = byte();
    if (b == kStop) return false;
    type = b & 0x0F;
    const std::uint8_t delta = b >> 4;
    id = delta != 0 ? static_cast<std::int16_t>(last_.back() + delta)
                    : static_cast<std::int16_t>(unzigzag(varint()));
    last_.back() = id;
    return true;
  }
  std::int64_t integer() { return unzigzag(varint()); }
  std::string string() {
    const std::uint64_t n = varint();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t list(std::uint8_t& elem) {
    const std::uint8_t b = byte();
    elem = b & 0x0F;
    std::size_t n = b >> 4;
    if (n == 15) n = varint();
    return n;
  }
  void skip(std::uint8_t type) {
    switch (type) {
      case kTrue:
      case kFalse:
        return;
      case kByte:
        byte();
        return;
      case kI16:
      case kI32:
      case kI64:
        varint();
        return;
      case kDouble:
        need(8);
        pos_ += 8;
        return;
      case kBinary:
        string();
        return;
      case kList:
      case kSet: {
        std::uint8_t elem;
        const std::size_t n = list(elem);
        for (std::size_t i = 0; i < n; ++i) skip_element(elem);
        return;
      }
      case kMap: {
        const std::uint64_t n = varint();
        if (n == 0) return;
        const std::uint8_t kv = byte();
        for (std::uint64_t i = 0; i < n; ++i) {
          skip_element(kv >> 4);
          skip_element(kv & 0x0F);
        }
        return;
      }
      case kStruct: {
        begin_struct();
        std::int16_t id;
        std::uint8_t t;
        while (field(id, t)) skip(t);
        end_struct();
        return;
      }
      default:
        throw SchemaError("parquet: unknown thrift type " + std::to_string(type));
    }
  }

 private:
  void skip_element(std::uint8_t type) {
    // Booleans inside containers occupy a byte.
    if (type == kTrue || type == kFalse) {
      byte();
      return;
    }
    skip(type);
  }
  void need(std::uint64_t n) const {
    if (pos_ + n > size_) throw SchemaError("parquet: truncated thrift data");
  }
  std::uint8_t byte() {
    need(1);
    return data_[pos_++];
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = byte();
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if ((b & 0x80) == 0) return v;
    }
    throw SchemaError("parquet: malformed varint");
  }
  static std::int64_t unzigzag(std::uint64_t v) {
    return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::vector<std::int16_t> last_{0};
};

std::string page_header(std::int32_t bytes, std::int32_t values) {
  CompactWriter w;
  w.begin_struct();
  w.i32(1, kPageData);
  w.i32(2, bytes);
  w.i32(3, bytes);
  w.field(5, kStruct);
  w.begin_struct();
  w.i32(1, values);
  w.i32(2, kEncodingPlain);
  w.i32(3, kEncodingRle);
  w.i32(4, kEncodingRle);
  w.end_struct();
  w.end_struct();
  return w.bytes();
}

struct ChunkMeta {
  std::int32_t type = -1;
  std::int32_t codec = -1;
  std::vector<std::string> path;
  std::int64_t num_values = 0;
  std::int64_t data_page_offset = -1;
  std::int64_t total_compressed = 0;
};

struct FileMeta {
  std::vector<std::string> names;
  std::vector<std::int32_t> types;
  std::vector<std::int32_t> repetition;
  std::int64_t num_rows = 0;
  std::vector<std::vector<ChunkMeta>> groups;
  std::vector<KeyValue> key_value;
};

ChunkMeta parse_column_meta(CompactReader& r) {
  ChunkMeta m;
  r.begin_struct();
  std::int16_t id;
  std::uint8_t t;
  while (r.field(id, t)) {
    if (id == 1 && t == kI32) {
      m.type = static_cast<std::int32_t>(r.integer());
    } else if (id == 3 && t == kList) {
      std::uint8_t e;
      const std::size_t n = r.list(e);
      for (std::size_t i = 0; i < n; ++i) m.path.push_back(r.string());
    } else if (id == 4 && t == kI32) {
      m.codec = static_cast<std::int32_t>(r.integer());
    } else if (id == 5 && t == kI64) {
      m.num_values = r.integer();
    } else if (id == 7 && t == kI64) {
      m.total_compressed = r.integer();
    } else if (id == 9 && t == kI64) {
      m.data_page_offset = r.integer();
    } else {
      r.skip(t);
    }
  }
  r.end_struct();
  return m;
}

FileMeta parse_footer(const std::uint8_t* data, std::size_t size) {
  CompactReader r(data, size);
  FileMeta fm;
  r.begin_struct();
  std::int16_t id;
  std::uint8_t t;
  while (r.field(id, t)) {
    if (id == 2 && t == kList) {
      std::uint8_t e;
      const std::size_t n = r.list(e);
      for (std::size_t i = 0; i < n; ++i) {
        std::string name;
        std::int32_t type = -1, rep = -1;
        r.begin_struct();
        std::int16_t fid;
        std::uint8_t ft;
        while (r.field(fid, ft)) {
          if (fid == 1 && ft == kI32) type = static_cast<std::int32_t>(r.integer());
          else if (fid == 3 && ft == kI32) rep = static_cast<std::int32_t>(r.integer());
          else if (fid == 4 && ft == kBinary) name = r.string();
          else r.skip(ft);
        }
        r.end_struct();
        if (i == 0) continue;  // root
        fm.names.push_back(name);
        fm.types.push_back(type);
        fm.repetition.push_back(rep);
      }
    } else if (id == 3 && t == kI64) {
      fm.num_rows = r.integer();
    } else if (id == 4 && t == kList) {
      std::uint8_t e;
      const std::size_t n = r.list(e);
      for (std::size_t g = 0; g < n; ++g) {
        std::vector<ChunkMeta> chunks;
        r.begin_struct();
        std::int16_t gid;
        std::uint8_t gt;
        while (r.field(gid, gt)) {
          if (gid == 1 && gt == kList) {
            std::uint8_t ce;
            const std::size_t nc = r.list(ce);
            for (std::size_t c = 0; c < nc; ++c) {
              std::optional<ChunkMeta> meta;
              r.begin_struct();
              std::int16_t cid;
              std::uint8_t ct;
              while (r.field(cid, ct)) {
                if (cid == 3 && ct == kStruct) meta = parse_column_meta(r);
                else r.skip(ct);
              }
              r.end_struct();
              if (!meta) throw SchemaError("parquet: column chunk without metadata");
              chunks.push_back(std::move(*meta));
            }
          } else {
            r.skip(gt);
          }
        }
        r.end_struct();
        fm.groups.push_back(std::move(chunks));
      }
    } else if (id == 5 && t == kList) {
      std::uint8_t e;
      const std::size_t n = r.list(e);
      for (std::size_t i = 0; i < n; ++i) {
        KeyValue kv;
        r.begin_struct();
        std::int16_t kid;
        std::uint8_t kt;
        while (r.field(kid, kt)) {
          if (kid == 1 && kt == kBinary) kv.first = r.string();
          else if (kid == 2 && kt == kBinary) kv.second = r.string();
          else r.skip(kt);
        }
        r.end_struct();
        fm.key_value.push_back(std::move(kv));
      }
    } else {
      r.skip(t);
    }
  }
  return fm;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("parquet: cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
    throw IoError("parquet: read failed for " + path.string());
  return bytes;
}

FileMeta load_footer(const std::vector<std::uint8_t>& bytes,
                     const std::filesystem::path& path) {
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0 ||
      std::memcmp(bytes.data() + size - 4, kMagic, 4) != 0)
    throw SchemaError("parquet: " + path.string() + " is not a parquet file");
  std::uint32_t footer_len;
  std::memcpy(&footer_len, bytes.data() + size - 8, 4);
  if (footer_len + 12 > size) throw SchemaError("parquet: bad footer length");
  return parse_footer(bytes.data() + size - 8 - footer_len, footer_len);
}

}  // namespace

const Column* Table::find(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

Writer::Writer(const std::filesystem::path& path,
               std::vector<std::string> column_names, std::size_t values_per_page)
    : path_(path), names_(std::move(column_names)),
      values_per_page_(std::max<std::size_t>(1, values_per_page)) {
  if (names_.empty()) throw InvalidArgument("parquet: no columns");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("parquet: cannot open " + path.string() + " for writing");
  put(std::string(kMagic, 4));
}

Writer::~Writer() = default;

void Writer::put(const std::string& bytes) {
  out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out_) throw IoError("parquet: write failed for " + path_.string());
  offset_ += static_cast<std::int64_t>(bytes.size());
}

void Writer::write_row_group(const std::vector<std::span<const float>>& columns) {
  if (closed_) throw InvalidArgument("parquet: writer already closed");
  if (columns.size() != names_.size())
    throw InvalidArgument("parquet: row group has wrong number of columns");
  const std::size_t rows = columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw InvalidArgument("parquet: ragged row group");

  GroupInfo group{{}, static_cast<std::int64_t>(rows)};
  for (const auto& col : columns) {
    ChunkInfo chunk{offset_, 0, static_cast<std::int64_t>(rows)};
    for (std::size_t start = 0; start < rows || (rows == 0 && start == 0);
         start += values_per_page_) {
      const std::size_t count = std::min(values_per_page_, rows - start);
      const auto bytes = static_cast<std::int32_t>(count * sizeof(float));
      put(page_header(bytes, static_cast<std::int32_t>(count)));
      put(std::string(reinterpret_cast<const char*>(col.data() + start),
                      count * sizeof(float)));
      if (rows == 0) break;
    }
    chunk.bytes = offset_ - chunk.offset;
    group.chunks.push_back(chunk);
  }
  groups_.push_back(std::move(group));
}

void Writer::close(const std::vector<KeyValue>& key_value) {
  if (closed_) return;
  std::int64_t total_rows = 0;
  for (const auto& g : groups_) total_rows += g.rows;

  CompactWriter w;
  w.begin_struct();
  w.i32(1, 1);
  w.list(2, kStruct, names_.size() + 1);
  w.begin_struct();
  w.string(4, "schema");
  w.i32(5, static_cast<std::int32_t>(names_.size()));
  w.end_struct();
  for (const auto& name : names_) {
    w.begin_struct();
    w.i32(1, kTypeFloat);
    w.i32(3, kRequired);
    w.string(4, name);
    w.end_struct();
  }
  w.i64(3, total_rows);
  w.list(4, kStruct, groups_.size());
  for (const auto& g : groups_) {
    w.begin_struct();
    w.list(1, kStruct, g.chunks.size());
    std::int64_t group_bytes = 0;
    for (std::size_t c = 0; c < g.chunks.size(); ++c) {
      const auto& ch = g.chunks[c];
      group_bytes += ch.bytes;
      w.begin_struct();
      w.i64(2, ch.offset);
      w.field(3, kStruct);
      w.begin_struct();
      w.i32(1, kTypeFloat);
      w.list(2, kI32, 2);
      w.raw_i32(kEncodingPlain);
      w.raw_i32(kEncodingRle);
      w.list(3, kBinary, 1);
      w.raw_string(names_[c]);
      w.i32(4, kCodecUncompressed);
      w.i64(5, ch.values);
      w.i64(6, ch.bytes);
      w.i64(7, ch.bytes);
      w.i64(9, ch.offset);
      w.end_struct();
      w.end_struct();
    }
    w.i64(2, group_bytes);
    w.i64(3, g.rows);
    w.end_struct();
  }
  if (!key_value.empty()) {
    w.list(5, kStruct, key_value.size());
    for (const auto& [k, v] : key_value) {
      w.begin_struct();
      w.string(1, k);
      w.string(2, v);
      w.end_struct();
    }
  }
  w.string(6, "spdegen");
  w.end_struct();

  const std::string& footer = w.bytes();
  put(footer);
  const auto len = static_cast<std::uint32_t>(footer.size());
  put(std::string(reinterpret_cast<const char*>(&len), 4));
  put(std::string(kMagic, 4));
  out_.close();
  if (!out_) throw IoError("parquet: close failed for " + path_.string());
  closed_ = true;
}

void write_table(const std::filesystem::path& path, const Table& table,
                 std::size_t rows_per_group) {
  std::vector<std::string> names;
  for (const auto& c : table.columns) names.push_back(c.name);
  Writer w(path, names);
  const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().values.size();
  const std::size_t step = rows_per_group == 0 ? std::max<std::size_t>(rows, 1) : rows_per_group;
  for (std::size_t start = 0; start < rows || start == 0; start += step) {
    const std::size_t count = std::min(step, rows - start);
    std::vector<std::span<const float>> spans;
    for (const auto& c : table.columns)
      spans.emplace_back(c.values.data() + start, count);
    w.write_row_group(spans);
    if (rows == 0) break;
  }
  w.close(table.key_value);
}

Table read_table(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const FileMeta fm = load_footer(bytes, path);

  Table table;
  table.num_rows = fm.num_rows;
  table.key_value = fm.key_value;
  table.row_groups = fm.groups.size();
  for (std::size_t c = 0; c < fm.names.size(); ++c) {
    if (fm.types[c] != kTypeFloat)
      throw SchemaError("parquet: column '" + fm.names[c] + "' is not FLOAT");
    if (fm.repetition[c] != kRequired)
      throw SchemaError("parquet: column '" + fm.names[c] + "' is not REQUIRED");
    table.columns.push_back({fm.names[c], {}});
    table.columns.back().values.reserve(static_cast<std::size_t>(fm.num_rows));
  }

  for (const auto& group : fm.groups) {
    if (group.size() != table.columns.size())
      throw SchemaError("parquet: row group column count mismatch");
    for (std::size_t c = 0; c < group.size(); ++c) {
      const ChunkMeta& meta = group[c];
      if (meta.codec != kCodecUncompressed)
        throw SchemaError("parquet: compressed column chunks are not supported");
      if (meta.path.empty() || meta.path.front() != table.columns[c].name)
        throw SchemaError("parquet: column chunk path mismatch");
      auto& values = table.columns[c].values;
      std::int64_t remaining = meta.num_values;
      auto pos = static_cast<std::size_t>(meta.data_page_offset);
      while (remaining > 0) {
        if (pos >= bytes.size()) throw SchemaError("parquet: page offset out of range");
        CompactReader r(bytes.data() + pos, bytes.size() - pos);
        std::int32_t type = -1, compressed = -1, page_values = -1, encoding = -1;
        r.begin_struct();
        std::int16_t id;
        std::uint8_t t;
        while (r.field(id, t)) {
          if (id == 1 && t == kI32) type = static_cast<std::int32_t>(r.integer());
          else if (id == 3 && t == kI32) compressed = static_cast<std::int32_t>(r.integer());
          else if (id == 5 && t == kStruct) {
            r.begin_struct();
            std::int16_t did;
            std::uint8_t dt;
            while (r.field(did, dt)) {
              if (did == 1 && dt == kI32) page_values = static_cast<std::int32_t>(r.integer());
              else if (did == 2 && dt == kI32) encoding = static_cast<std::int32_t>(r.integer());
              else r.skip(dt);
            }
            r.end_struct();
          } else {
            r.skip(t);
          }
        }
        r.end_struct();
        pos += r.position();
        if (type != kPageData)
          throw SchemaError("parquet: only v1 data pages are supported");
        if (encoding != kEncodingPlain)
          throw SchemaError("parquet: only PLAIN encoding is supported");
        if (compressed < 0 || pos + static_cast<std::size_t>(compressed) > bytes.size() ||
            static_cast<std::int64_t>(page_values) * 4 != compressed)
          throw SchemaError("parquet: inconsistent data page size");
        const std::size_t old = values.size();
        values.resize(old + static_cast<std::size_t>(page_values));
        std::memcpy(values.data() + old, bytes.data() + pos,
                    static_cast<std::size_t>(compressed));
        pos += static_cast<std::size_t>(compressed);
        remaining -= page_values;
      }
    }
  }
  for (const auto& c : table.columns)
    if (static_cast<std::int64_t>(c.values.size()) != fm.num_rows)
      throw SchemaError("parquet: column '" + c.name + "' length differs from num_rows");
  return table;
}

std::vector<KeyValue> read_key_value(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  return load_footer(bytes, path).key_value;
}

}  // namespace spdegen::parquet
