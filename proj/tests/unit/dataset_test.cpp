#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "falcon/binary_io.hpp"
#include "falcon/dataset.hpp"
#include "fixtures.hpp"

using namespace falcon;
using falcon::testing::TempDir;

namespace {

void write_raw(const std::filesystem::path& p, const std::vector<std::byte>& bytes) { io::write_file(p, bytes); }

std::vector<std::byte> fvecs_bytes(const std::vector<std::vector<float>>& rows) {
  std::vector<std::byte> out;
  for (const auto& r : rows) {
    io::append_u32(out, static_cast<std::uint32_t>(r.size()));
    for (float v : r) io::append_f32(out, v);
  }
  return out;
}

}  // namespace

TEST(Fvecs, SingleRecord) {
  TempDir dir("fvecs");
  write_raw(dir / "a.fvecs", fvecs_bytes({{1.0f, 2.0f}}));
  const VectorSet vs = read_fvecs(dir / "a.fvecs");
  EXPECT_EQ(vs.count, 1u);
  EXPECT_EQ(vs.dim, 2u);
  EXPECT_EQ(vs.data, (std::vector<float>{1.0f, 2.0f}));
}

TEST(Fvecs, EmptyFileHasNoDim) {
  TempDir dir("fvecs");
  write_raw(dir / "e.fvecs", {});
  const VectorSet vs = read_fvecs(dir / "e.fvecs");
  EXPECT_EQ(vs.count, 0u);
  EXPECT_FALSE(vs.has_dim());
}

TEST(Fvecs, RoundTripIsByteIdentical) {
  TempDir dir("fvecs");
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 1 + rng() % 40, count = rng() % 50;
    std::vector<std::vector<float>> rows(count, std::vector<float>(dim));
    std::normal_distribution<float> nd;
    for (auto& r : rows) for (auto& v : r) v = nd(rng);
    const auto bytes = fvecs_bytes(rows);
    write_raw(dir / "in.fvecs", bytes);
    write_fvecs(read_fvecs(dir / "in.fvecs"), dir / "out.fvecs");
    EXPECT_EQ(io::read_file(dir / "out.fvecs"), bytes);
  }
}

TEST(Fvecs, TruncatedRecordReportsOffset) {
  TempDir dir("fvecs");
  auto bytes = fvecs_bytes({{1, 2, 3}, {4, 5, 6}});
  bytes.resize(bytes.size() - 2);
  write_raw(dir / "t.fvecs", bytes);
  try {
    read_fvecs(dir / "t.fvecs");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 16"), std::string::npos) << e.what();
  }
}

TEST(Fvecs, TruncatedHeader) {
  TempDir dir("fvecs");
  auto bytes = fvecs_bytes({{1, 2}});
  bytes.push_back(std::byte{3});
  write_raw(dir / "t.fvecs", bytes);
  EXPECT_THROW(read_fvecs(dir / "t.fvecs"), FormatError);
}

TEST(Fvecs, InconsistentDimensionNamesRecord) {
  TempDir dir("fvecs");
  write_raw(dir / "d.fvecs", fvecs_bytes({{1, 2}, {3, 4}, {5, 6, 7}}));
  try {
    read_fvecs(dir / "d.fvecs");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos) << e.what();
  }
}

TEST(Fvecs, RejectsNonFiniteAndZeroDim) {
  TempDir dir("fvecs");
  write_raw(dir / "n.fvecs", fvecs_bytes({{1.0f, std::nanf("")}}));
  EXPECT_THROW(read_fvecs(dir / "n.fvecs"), FormatError);
  std::vector<std::byte> zero;
  io::append_u32(zero, 0);
  write_raw(dir / "z.fvecs", zero);
  EXPECT_THROW(read_fvecs(dir / "z.fvecs"), FormatError);
}

TEST(Fvecs, MissingFile) { EXPECT_ANY_THROW(read_fvecs("/nonexistent/falcon/x.fvecs")); }

TEST(Ivecs, SingleRecordAndEmpty) {
  TempDir dir("ivecs");
  std::vector<std::byte> bytes;
  for (std::uint32_t v : {3u, 5u, 9u, 2u}) io::append_u32(bytes, v);
  write_raw(dir / "a.ivecs", bytes);
  const GroundTruth gt = read_ivecs(dir / "a.ivecs");
  EXPECT_EQ(gt.num_queries, 1u);
  EXPECT_EQ(gt.k_gt, 3u);
  EXPECT_EQ(gt.ids, (std::vector<std::uint32_t>{5, 9, 2}));

  write_raw(dir / "e.ivecs", {});
  EXPECT_EQ(read_ivecs(dir / "e.ivecs").num_queries, 0u);
}

TEST(Ivecs, RoundTrip) {
  TempDir dir("ivecs");
  GroundTruth gt{4, 7, {}};
  std::mt19937 rng(3);
  for (int i = 0; i < 28; ++i) gt.ids.push_back(rng() % 1000);
  write_ivecs(gt, dir / "g.ivecs");
  EXPECT_EQ(read_ivecs(dir / "g.ivecs"), gt);
}

TEST(Synthetic, ZeroCountAndDeterminism) {
  EXPECT_EQ(generate_synthetic(0, 8, 1, Distribution::Uniform01).count, 0u);
  EXPECT_EQ(generate_synthetic(100, 8, 42, Distribution::Uniform01),
            generate_synthetic(100, 8, 42, Distribution::Uniform01));
  EXPECT_NE(generate_synthetic(100, 8, 42, Distribution::Gaussian).data,
            generate_synthetic(100, 8, 43, Distribution::Gaussian).data);
}

TEST(Synthetic, GaussianMeanNearZero) {
  const VectorSet vs = generate_synthetic(10000, 16, 7, Distribution::Gaussian);
  for (std::size_t d = 0; d < 16; ++d) {
    double sum = 0;
    for (std::size_t i = 0; i < vs.count; ++i) sum += vs.row(i)[d];
    EXPECT_NEAR(sum / vs.count, 0.0, 0.05) << "dim " << d;
  }
}

TEST(Synthetic, UniformInUnitInterval) {
  const VectorSet vs = generate_synthetic(1000, 4, 9, Distribution::Uniform01);
  for (float v : vs.data) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
}

TEST(Distance, HandValues) {
  const std::vector<float> a{0, 0}, b{3, 4}, x{1, 0}, y{0, 1};
  EXPECT_EQ(distance(Metric::L2, b, b), 0.0f);
  EXPECT_EQ(distance(Metric::L2, a, b), 25.0f);
  EXPECT_FLOAT_EQ(distance(Metric::Cosine, x, y), 1.0f);
  EXPECT_EQ(distance(Metric::Cosine, b, b), 0.0f);
  EXPECT_EQ(distance(Metric::InnerProduct, b, b), -25.0f);
}

TEST(Distance, Errors) {
  const std::vector<float> a{1, 2}, b{1, 2, 3}, z{0, 0};
  EXPECT_THROW(distance(Metric::L2, a, b), std::invalid_argument);
  EXPECT_THROW(distance(Metric::Cosine, a, z), std::invalid_argument);
}

TEST(Distance, MetricNames) {
  for (Metric m : {Metric::L2, Metric::InnerProduct, Metric::Cosine}) EXPECT_EQ(parse_metric(to_string(m)), m);
  EXPECT_THROW(parse_metric("hamming"), std::invalid_argument);
}

TEST(BruteForce, HandExample) {
  const VectorSet base = falcon::testing::vectors_1d({0, 1, 2});
  const std::vector<float> q{0.9f};
  const auto r = brute_force_knn(base, q, 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].id, 1u);
  EXPECT_NEAR(r[0].distance, 0.01f, 1e-6f);
  EXPECT_EQ(r[1].id, 0u);
  EXPECT_NEAR(r[1].distance, 0.81f, 1e-6f);
}

TEST(BruteForce, FullKIsPermutation) {
  const VectorSet base = generate_synthetic(50, 3, 5, Distribution::Uniform01);
  const std::vector<float> q{0.5f, 0.5f, 0.5f};
  auto r = brute_force_knn(base, q, 50);
  std::vector<NodeId> ids;
  for (auto& n : r) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  for (NodeId i = 0; i < 50; ++i) EXPECT_EQ(ids[i], i);
  EXPECT_THROW(brute_force_knn(base, q, 51), std::invalid_argument);
}

// Independent quadratic scan: full sort of every (distance, id) pair.
TEST(BruteForce, AgreesWithQuadraticScan) {
  const VectorSet base = generate_synthetic(1000, 8, 21, Distribution::Gaussian);
  const VectorSet queries = generate_synthetic(100, 8, 22, Distribution::Gaussian);
  for (std::size_t q = 0; q < queries.count; ++q) {
    std::vector<std::pair<float, NodeId>> all;
    for (NodeId i = 0; i < base.count; ++i) {
      float s = 0;
      for (std::size_t d = 0; d < 8; ++d) {
        const float diff = base.row(i)[d] - queries.row(q)[d];
        s += diff * diff;
      }
      all.emplace_back(s, i);
    }
    std::sort(all.begin(), all.end());
    const auto r = brute_force_knn(base, queries.row(q), 10);
    for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(r[j].id, all[j].second);
  }
}

TEST(GroundTruthTest, MatchesBruteForce) {
  const VectorSet base = generate_synthetic(200, 4, 1, Distribution::Gaussian);
  const VectorSet queries = generate_synthetic(5, 4, 2, Distribution::Gaussian);
  const GroundTruth gt = compute_ground_truth(base, queries, 7);
  EXPECT_EQ(gt.num_queries, 5u);
  EXPECT_EQ(gt.k_gt, 7u);
  for (std::size_t q = 0; q < 5; ++q) {
    const auto r = brute_force_knn(base, queries.row(q), 7);
    for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(gt.row(q)[j], r[j].id);
  }
}
