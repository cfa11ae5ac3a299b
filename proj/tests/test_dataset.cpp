#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include "spdegen/dataset.hpp"
#include "spdegen/error.hpp"
#include "spdegen/parquet.hpp"
#include "test_util.hpp"

using namespace spdegen;

namespace {

std::vector<float> ramp(std::size_t n, float scale = 1.0f) {
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = scale * static_cast<float>(i) - 3.25f;
  return v;
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

DatasetRecord small_record(std::vector<std::size_t> dims) {
  DatasetRecord r;
  r.dims = std::move(dims);
  const std::size_t len = r.column_length();
  r.names = {"xi", "u"};
  r.columns = {ramp(len, 0.5f), ramp(len, -1.5f)};
  r.metadata = {{"equation", "test"}, {"J", 4}};
  return r;
}

}  // namespace

TEST(Flatten, RowMajorFirstAxisOutermost) {
  // (2, 3) holds [[0, 1, 2], [3, 4, 5]].
  const Tensor t = reshape({0, 1, 2, 3, 4, 5}, {2, 3});
  EXPECT_EQ(t.data[1 * 3 + 2], 5.0);
  EXPECT_EQ(flatten(t), (std::vector<double>{0, 1, 2, 3, 4, 5}));
  // (N, T, X) = (2, 2, 2): element (1, 0, 1) sits at 1*4 + 0*2 + 1 = 5.
  const Tensor u = reshape({0, 1, 2, 3, 4, 5, 6, 7}, {2, 2, 2});
  EXPECT_EQ(u.data[5], 5.0);
  EXPECT_THROW(reshape({1, 2, 3}, {2, 2}), InvalidArgument);
  Tensor bad{{2, 2}, {1.0}};
  EXPECT_THROW(flatten(bad), InvalidArgument);
}

TEST(Flatten, RandomRoundTrips) {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<std::size_t> rank(1, 4), extent(1, 6);
  std::normal_distribution<double> value;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::size_t> shape(rank(gen));
    for (auto& s : shape) s = extent(gen);
    std::vector<double> flat(shape_size(shape));
    for (double& v : flat) v = value(gen);
    const Tensor t = reshape(flat, shape);
    ASSERT_EQ(t.shape, shape);
    ASSERT_EQ(flatten(t), flat);
  }
}

TEST(Stack, ShapesFor1DAnd2D) {
  std::vector<Trajectory> line(3, Trajectory(Grid::line(8), 4));
  line[2].values[5] = 9.0;
  const Tensor a = stack(line);
  EXPECT_EQ(a.shape, (std::vector<std::size_t>{3, 4, 8}));
  EXPECT_EQ(a.data[2 * 32 + 5], 9.0);
  std::vector<Trajectory> sq(2, Trajectory(Grid::square(8), 3));
  EXPECT_EQ(stack(sq).shape, (std::vector<std::size_t>{2, 3, 8, 8}));
  std::vector<Trajectory> mixed{Trajectory(Grid::line(8), 4), Trajectory(Grid::line(8), 5)};
  EXPECT_THROW(stack(mixed), InvalidArgument);
}

TEST(Downsample, StridesFromIndexZero) {
  Trajectory t(Grid::square(8), 6);
  for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = static_cast<double>(i);
  for (std::size_t s = 0; s < 6; ++s) t.times[s] = 0.1 * static_cast<double>(s);
  const Trajectory d = downsample(t, 2, 4);
  ASSERT_EQ(d.n_slices(), 3u);
  EXPECT_EQ(d.grid.nx, 2u);
  EXPECT_EQ(d.grid.ny, 2u);
  EXPECT_DOUBLE_EQ(d.times[1], 0.2);
  // Slice 1 of d is slice 2 of t; point (1, 1) of d is (4, 4) of t.
  EXPECT_EQ(d.slice(1)[1 * 2 + 1], t.slice(2)[4 * 8 + 4]);
  const Trajectory same = downsample(t, 1, 1);
  EXPECT_EQ(same.values, t.values);
  EXPECT_THROW(downsample(t, 0, 1), InvalidArgument);
  EXPECT_THROW(downsample(t, 1, 3), InvalidArgument);
}

TEST(FileNames, Conventions) {
  EXPECT_EQ(dataset_file_name(Equation::Phi42, "expl", Task::Xi, 2, 1200),
            "Phi42+_expl_xi_eps_2_1200.parquet");
  EXPECT_EQ(dataset_file_name(Equation::Phi42, "reno", Task::U0Xi, 128, 1200),
            "Phi42+_reno_u0_xi_eps_128_1200.parquet");
  EXPECT_EQ(dataset_file_name(Equation::GinzburgLandau, "01", Task::Xi, 32, 1200),
            "Phi41_01-xi-32-1200.parquet");
  EXPECT_EQ(dataset_file_name(Equation::GinzburgLandau, "1", Task::U0Xi, 256, 1200),
            "Phi41_1-u0_xi-256-1200.parquet");
  EXPECT_EQ(dataset_file_name(Equation::KdV, "Q", Task::Xi, 64, 1200),
            "KdV_Q-xi-64-1200.parquet");
  EXPECT_EQ(dataset_file_name(Equation::KdV, "cyl", Task::Xi, 64, 10),
            "KdV_cyl-xi-64-10.parquet");
  EXPECT_EQ(dataset_file_name(Equation::Wave, "", Task::Xi, 128, 1200), "Wave-xi-128-1200.parquet");
  EXPECT_EQ(dataset_file_name(Equation::NSEVorticity, "", Task::U0Xi, 32, 1200),
            "NS-u0_xi-32-1200.parquet");
  EXPECT_THROW(dataset_file_name(Equation::Phi42, "other", Task::Xi, 2, 1), InvalidArgument);
  EXPECT_THROW(dataset_file_name(Equation::Wave, "", Task::Xi, 0, 1), InvalidArgument);
  EXPECT_EQ(task_from_string("u0_xi"), Task::U0Xi);
  EXPECT_THROW(task_from_string("noise"), InvalidArgument);
}

TEST(Parquet, RoundTripIsBitwise) {
  test::TempDir dir;
  for (auto dims : {std::vector<std::size_t>{3, 4, 8}, std::vector<std::size_t>{2, 3, 4, 4}}) {
    DatasetRecord rec = small_record(dims);
    rec.columns[1][3] = std::nextafter(1.0f, 2.0f);
    rec.columns[1][4] = -0.0f;
    rec.columns[1][5] = 1e-40f;  // subnormal
    const auto path = dir / "round.parquet";
    write_parquet(rec, path);
    const DatasetRecord back = read_parquet(path);
    EXPECT_EQ(back.dims, rec.dims);
    EXPECT_EQ(back.names, rec.names);
    EXPECT_EQ(back.metadata, rec.metadata);
    for (std::size_t c = 0; c < rec.columns.size(); ++c)
      EXPECT_TRUE(same_bits(back.columns[c], rec.columns[c]));
    EXPECT_TRUE(std::filesystem::exists(sidecar_path(path)));
    const auto header = read_parquet_header(path);
    EXPECT_EQ(header.dims, rec.dims);
    EXPECT_TRUE(header.columns.empty());
  }
}

TEST(Parquet, TensorViewMatchesDims) {
  const DatasetRecord rec = small_record({2, 3, 4});
  const Tensor t = rec.tensor("u");
  EXPECT_EQ(t.shape, rec.dims);
  EXPECT_EQ(t.data[7], static_cast<double>(rec.column("u")[7]));
  EXPECT_TRUE(rec.has_column("xi"));
  EXPECT_FALSE(rec.has_column("a_eps"));
  EXPECT_THROW(rec.column("a_eps"), InvalidArgument);
}

TEST(Parquet, WriterEmitsOneRowGroupPerAppend) {
  test::TempDir dir;
  const auto path = dir / "batched.parquet";
  const std::vector<std::size_t> sample{3, 4};
  const std::size_t per = 12;
  std::vector<float> all_xi, all_u;
  {
    DatasetWriter w(path, {"xi", "u"}, sample);
    for (std::size_t batch : {std::size_t{2}, std::size_t{3}, std::size_t{1}}) {
      auto xi = ramp(batch * per, static_cast<float>(batch));
      auto u = ramp(batch * per, -0.25f);
      all_xi.insert(all_xi.end(), xi.begin(), xi.end());
      all_u.insert(all_u.end(), u.begin(), u.end());
      w.append({xi, u}, batch);
    }
    EXPECT_THROW(w.append({ramp(per), ramp(per - 1)}, 1), InvalidArgument);
    w.finish({{"note", "batched"}});
    EXPECT_EQ(w.samples_written(), 6u);
  }
  const auto table = parquet::read_table(path);
  EXPECT_EQ(table.row_groups, 3u);
  const auto rec = read_parquet(path);
  EXPECT_EQ(rec.dims, (std::vector<std::size_t>{6, 3, 4}));
  EXPECT_TRUE(same_bits(rec.column("xi"), all_xi));
  EXPECT_TRUE(same_bits(rec.column("u"), all_u));
  EXPECT_EQ(rec.metadata["note"], "batched");
}

TEST(Parquet, SchemaErrors) {
  test::TempDir dir;
  DatasetRecord bad = small_record({2, 3, 4});
  bad.columns[0].pop_back();
  EXPECT_THROW(bad.validate(), SchemaError);
  EXPECT_THROW(write_parquet(bad, dir / "bad.parquet"), SchemaError);
  DatasetRecord flat = small_record({2, 3, 4});
  flat.dims = {24};
  EXPECT_THROW(flat.validate(), SchemaError);

  // A valid Parquet file whose dims disagree with the column length.
  parquet::Table t;
  t.columns = {{"u", ramp(10)}};
  t.num_rows = 10;
  t.key_value = {{"spdegen.dims", "[2,3,4]"}, {"spdegen.columns", "[\"u\"]"},
                 {"spdegen.metadata", "{}"}};
  parquet::write_table(dir / "mismatch.parquet", t);
  EXPECT_THROW(read_parquet(dir / "mismatch.parquet"), SchemaError);

  t.key_value = {{"spdegen.metadata", "{}"}};
  parquet::write_table(dir / "nodims.parquet", t);
  EXPECT_THROW(read_parquet(dir / "nodims.parquet"), SchemaError);

  t.key_value = {{"spdegen.dims", "not json"}, {"spdegen.metadata", "{}"}};
  parquet::write_table(dir / "garbled.parquet", t);
  EXPECT_THROW(read_parquet(dir / "garbled.parquet"), SchemaError);

  test::write_file(dir / "junk.parquet", "this is not parquet at all");
  EXPECT_THROW(read_parquet(dir / "junk.parquet"), SchemaError);
  EXPECT_THROW(read_parquet(dir / "missing.parquet"), IoError);
}

TEST(Parquet, ReadableByPyarrow) {
  if (std::system("python3 -c 'import pyarrow' >/dev/null 2>&1") != 0)
    GTEST_SKIP() << "pyarrow not available";
  test::TempDir dir;
  const DatasetRecord rec = small_record({2, 3, 4});
  const auto path = dir / "arrow.parquet";
  write_parquet(rec, path);
  const auto out = dir / "arrow.txt";
  const std::string script =
      "import json, sys, pyarrow.parquet as pq\n"
      "t = pq.read_table(sys.argv[1])\n"
      "md = t.schema.metadata\n"
      "dims = json.loads(md[b'spdegen.dims'])\n"
      "u = t.column('u').to_pylist()\n"
      "open(sys.argv[2], 'w').write(json.dumps({'dims': dims, 'rows': t.num_rows,"
      " 'u': u, 'type': str(t.schema.field('u').type)}))\n";
  test::write_file(dir / "check.py", script);
  const std::string cmd = "python3 " + (dir / "check.py").string() + " " + path.string() + " " +
                          out.string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const auto doc = nlohmann::json::parse(test::read_file(out));
  EXPECT_EQ(doc["dims"].get<std::vector<std::size_t>>(), rec.dims);
  EXPECT_EQ(doc["rows"].get<std::size_t>(), rec.column_length());
  EXPECT_EQ(doc["type"], "float");
  const auto u = doc["u"].get<std::vector<double>>();
  ASSERT_EQ(u.size(), rec.column("u").size());
  for (std::size_t i = 0; i < u.size(); ++i)
    EXPECT_EQ(static_cast<float>(u[i]), rec.column("u")[i]);
}

TEST(Splits, DeterministicDisjointCover) {
  const Split a = split_indices(1200, 7);
  const Split b = split_indices(1200, 7);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size(), 840u);
  EXPECT_EQ(a.valid.size(), 180u);
  EXPECT_EQ(a.test.size(), 180u);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.valid.begin(), a.valid.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 1200u);
  EXPECT_EQ(*all.rbegin(), 1199u);
  EXPECT_NE(split_indices(1200, 8).train, a.train);
  const Split tiny = split_indices(2, 1);
  EXPECT_EQ(tiny.train.size() + tiny.valid.size() + tiny.test.size(), 2u);
}
