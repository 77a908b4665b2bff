#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "falcon/binary_io.hpp"
#include "falcon/graph_index.hpp"
#include "falcon/traversal.hpp"
#include "fixtures.hpp"

using namespace falcon;
using falcon::testing::TempDir;
using falcon::testing::vectors_1d;

namespace {

std::vector<NodeId> sorted_neighbors(const GraphIndex& g, NodeId v) {
  auto s = g.neighbors(v);
  std::vector<NodeId> out(s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(GraphIndex, ConstructionErrors) {
  EXPECT_THROW(GraphIndex(VectorSet{}, 4), std::invalid_argument);
  EXPECT_THROW(GraphIndex(vectors_1d({1, 2}), 0), std::invalid_argument);
  EXPECT_THROW(GraphIndex(vectors_1d({1, 2}), 1, 2), std::invalid_argument);
}

TEST(GraphIndex, SetNeighborsAndValidate) {
  GraphIndex g(vectors_1d({0, 1, 2}), 2);
  const std::vector<NodeId> too_many{1, 2, 0};
  EXPECT_THROW(g.set_neighbors(0, too_many), std::invalid_argument);
  const std::vector<NodeId> ok{1, 2};
  g.set_neighbors(0, ok);
  EXPECT_EQ(g.degree(0), 2u);
  EXPECT_NO_THROW(g.validate());
  const std::vector<NodeId> self{1, 1};
  g.set_neighbors(1, self);
  EXPECT_THROW(g.validate(), std::logic_error);
  const std::vector<NodeId> loop{2};
  g.set_neighbors(2, loop);
  g.set_neighbors(1, std::vector<NodeId>{});
  EXPECT_THROW(g.validate(), std::logic_error);
}

TEST(GraphIndex, ChannelLayoutRoundRobin) {
  GraphIndex g(vectors_1d({0, 1, 2, 3, 4, 5}), 1, 0, 4);
  EXPECT_EQ(g.layout(), (std::vector<std::uint32_t>{0, 1, 2, 3, 0, 1}));
  g.set_channel_count(2);
  EXPECT_EQ(g.channel_of(5), 1u);
}

TEST(BuildGraph, SingleVector) {
  const GraphIndex g = build_graph(vectors_1d({3.0f}), 4, 8, 1);
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(g.entry_node(), 0u);
}

TEST(BuildGraph, TriangleIsComplete) {
  const GraphIndex g = build_graph(vectors_1d({0.0f, 1.0f, 5.0f}), 2, 4, 1);
  EXPECT_EQ(sorted_neighbors(g, 0), (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(sorted_neighbors(g, 1), (std::vector<NodeId>{0, 2}));
  EXPECT_EQ(sorted_neighbors(g, 2), (std::vector<NodeId>{0, 1}));
}

TEST(BuildGraph, Errors) {
  EXPECT_THROW(build_graph(VectorSet{}, 4, 8, 1), std::invalid_argument);
  EXPECT_THROW(build_graph(vectors_1d({1, 2}), 1, 8, 1), std::invalid_argument);
  EXPECT_THROW(build_graph(vectors_1d({1, 2}), 8, 4, 1), std::invalid_argument);
}

TEST(BuildGraph, DeterministicAndValid) {
  const VectorSet vs = generate_synthetic(500, 8, 3, Distribution::Gaussian);
  const GraphIndex a = build_graph(vs, 12, 32, 5);
  const GraphIndex b = build_graph(vs, 12, 32, 5);
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(serialize_index(a), serialize_index(b));
  EXPECT_EQ(a.entry_node(), select_entry(vs, EntryStrategy::Medoid));
}

TEST(BuildGraph, RecallOnUniform2d) {
  const VectorSet base = generate_synthetic(2000, 2, 41, Distribution::Uniform01);
  const VectorSet queries = generate_synthetic(100, 2, 42, Distribution::Uniform01);
  const GroundTruth gt = compute_ground_truth(base, queries, 10);
  const GraphIndex g = build_graph(base, 16, 64, 1);
  double recall = 0;
  for (std::size_t q = 0; q < queries.count; ++q) {
    recall += recall_at_k(bfs_search(g, queries.row(q), SearchParams::bfs(10, 64)).neighbors, gt.row(q), 10);
  }
  EXPECT_GE(recall / queries.count, 0.95);
}

TEST(SelectEntry, FirstAndMedoid) {
  const VectorSet vs = vectors_1d({0, 5, 10});
  EXPECT_EQ(select_entry(vs, EntryStrategy::First), 0u);
  EXPECT_EQ(select_entry(vs, EntryStrategy::Medoid), 1u);
}

TEST(SelectEntry, MedoidMatchesExhaustiveScan) {
  const VectorSet vs = generate_synthetic(1000, 6, 8, Distribution::Gaussian);
  std::vector<double> centroid(6, 0.0);
  for (std::size_t i = 0; i < vs.count; ++i) {
    for (std::size_t d = 0; d < 6; ++d) centroid[d] += vs.row(i)[d];
  }
  for (auto& c : centroid) c /= static_cast<double>(vs.count);
  NodeId best = 0;
  double best_d = 1e300;
  for (NodeId i = 0; i < vs.count; ++i) {
    double s = 0;
    for (std::size_t d = 0; d < 6; ++d) s += (vs.row(i)[d] - centroid[d]) * (vs.row(i)[d] - centroid[d]);
    if (s < best_d) {
      best_d = s;
      best = i;
    }
  }
  EXPECT_EQ(select_entry(vs, EntryStrategy::Medoid), best);
}

TEST(Fgvs, TriangleRoundTrip) {
  TempDir dir("fgvs");
  const GraphIndex g = build_graph(vectors_1d({0.0f, 1.0f, 5.0f}), 2, 4, 1);
  save_index(g, dir / "t.fgvs");
  EXPECT_EQ(load_index(dir / "t.fgvs"), g);
}

TEST(Fgvs, BuiltGraphReSaveIsByteIdentical) {
  TempDir dir("fgvs");
  const GraphIndex g = build_graph(generate_synthetic(2000, 8, 2, Distribution::Gaussian), 16, 32, 1);
  save_index(g, dir / "a.fgvs");
  save_index(load_index(dir / "a.fgvs"), dir / "b.fgvs");
  EXPECT_EQ(io::read_file(dir / "a.fgvs"), io::read_file(dir / "b.fgvs"));
}

TEST(Fgvs, RejectsCorruptFiles) {
  const GraphIndex g = build_graph(generate_synthetic(20, 3, 2, Distribution::Gaussian), 4, 8, 1);
  const auto good = serialize_index(g);
  auto bad_magic = good;
  bad_magic[0] = std::byte{'X'};
  EXPECT_THROW(deserialize_index(bad_magic), FormatError);
  auto bad_version = good;
  bad_version[4] = std::byte{9};
  EXPECT_THROW(deserialize_index(bad_version), FormatError);
  auto truncated = good;
  truncated.pop_back();
  EXPECT_THROW(deserialize_index(truncated), FormatError);
  EXPECT_THROW(deserialize_index(std::span<const std::byte>(good.data(), 10)), FormatError);
}

TEST(Adjacency, ChainImport) {
  TempDir dir("adj");
  std::vector<std::byte> bytes;
  for (std::uint32_t v : {3u, 2u, 1u, 1u, 2u, 0u, 2u, 1u, 1u}) io::append_u32(bytes, v);
  io::write_file(dir / "chain.adj", bytes);
  const ImportResult r = import_adjacency(vectors_1d({0, 1, 2}), dir / "chain.adj", 0);
  EXPECT_EQ(r.index.degrees(), (std::vector<std::uint32_t>{1, 2, 1}));
  EXPECT_EQ(r.dropped, 0u);
}

TEST(Adjacency, SelfLoopDropped) {
  TempDir dir("adj");
  std::vector<std::byte> bytes;
  for (std::uint32_t v : {2u, 2u, 2u, 0u, 1u, 1u, 0u}) io::append_u32(bytes, v);
  io::write_file(dir / "loop.adj", bytes);
  const ImportResult r = import_adjacency(vectors_1d({0, 1}), dir / "loop.adj", 0);
  EXPECT_EQ(r.dropped, 1u);
  EXPECT_EQ(sorted_neighbors(r.index, 0), (std::vector<NodeId>{1}));
}

TEST(Adjacency, RejectsOutOfRangeAndCountMismatch) {
  TempDir dir("adj");
  std::vector<std::byte> bytes;
  for (std::uint32_t v : {2u, 2u, 1u, 7u, 0u}) io::append_u32(bytes, v);
  io::write_file(dir / "oor.adj", bytes);
  EXPECT_THROW(import_adjacency(vectors_1d({0, 1}), dir / "oor.adj", 0), FormatError);
  EXPECT_THROW(import_adjacency(vectors_1d({0, 1, 2}), dir / "oor.adj", 0), FormatError);
}

TEST(Adjacency, ExportImportRoundTrip) {
  TempDir dir("adj");
  const VectorSet vs = generate_synthetic(300, 4, 6, Distribution::Gaussian);
  const GraphIndex g = build_graph(vs, 10, 20, 1);
  export_adjacency(g, dir / "g.adj");
  const ImportResult r = import_adjacency(vs, dir / "g.adj", g.entry_node());
  EXPECT_EQ(r.dropped, 0u);
  EXPECT_EQ(r.index, g);
}

TEST(Subgraphs, OnePartEqualsBuild) {
  const VectorSet vs = generate_synthetic(400, 4, 7, Distribution::Gaussian);
  const SubgraphSet s = split_subgraphs(vs, 1, 8, 16, 3);
  ASSERT_EQ(s.parts.size(), 1u);
  EXPECT_EQ(s.parts[0], build_graph(vs, 8, 16, 3));
}

TEST(Subgraphs, SingletonParts) {
  const VectorSet vs = generate_synthetic(6, 2, 7, Distribution::Gaussian);
  const SubgraphSet s = split_subgraphs(vs, 6, 4, 8, 3);
  ASSERT_EQ(s.parts.size(), 6u);
  for (const auto& p : s.parts) {
    EXPECT_EQ(p.size(), 1u);
    EXPECT_EQ(p.edge_count(), 0u);
  }
}

TEST(Subgraphs, RoundRobinOwnership) {
  const VectorSet vs = generate_synthetic(50, 3, 7, Distribution::Gaussian);
  const SubgraphSet s = split_subgraphs(vs, 4, 4, 8, 3);
  EXPECT_EQ(s.total_nodes(), 50u);
  for (NodeId v = 0; v < 50; ++v) {
    const auto [part, local] = s.owner[v];
    EXPECT_EQ(part, v % 4);
    EXPECT_EQ(s.global_ids[part][local], v);
    const auto row = s.parts[part].vectors().row(local);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), vs.row(v).begin()));
  }
  EXPECT_THROW(split_subgraphs(vs, 0, 4, 8, 3), std::invalid_argument);
  EXPECT_THROW(split_subgraphs(vs, 51, 4, 8, 3), std::invalid_argument);
}
