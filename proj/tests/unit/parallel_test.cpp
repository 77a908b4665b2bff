#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <thread>

#include "falcon/parallel.hpp"
#include "fixtures.hpp"

using namespace falcon;

namespace {

struct Workload {
  VectorSet base;
  VectorSet queries;
  GroundTruth gt;
  GraphIndex index;
};

const Workload& workload() {
  static const Workload w = [] {
    Workload out;
    out.base = generate_synthetic(3000, 16, 61, Distribution::Gaussian);
    out.queries = generate_synthetic(100, 16, 62, Distribution::Gaussian);
    out.gt = compute_ground_truth(out.base, out.queries, 10);
    out.index = build_graph(out.base, 16, 48, 1);
    return out;
  }();
  return w;
}

EngineConfig across(std::size_t pipelines) {
  EngineConfig c;
  c.mode = ExecMode::AcrossQuery;
  c.pipelines = pipelines;
  return c;
}

EngineConfig intra(std::size_t units) {
  EngineConfig c;
  c.mode = ExecMode::IntraQuery;
  c.units = units;
  return c;
}

}  // namespace

TEST(EngineConfigTest, Validation) {
  EngineConfig c;
  c.units = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.units = 1;
  c.pipelines = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  for (ExecMode m : {ExecMode::AcrossQuery, ExecMode::IntraQuery, ExecMode::Partitioned}) {
    EXPECT_EQ(parse_exec_mode(to_string(m)), m);
  }
}

TEST(Across, EmptyBatch) {
  EXPECT_TRUE(search_batch_across(workload().index, VectorSet{}, SearchParams::bfs(10, 32), across(4)).empty());
}

TEST(Across, BatchOfOneEqualsDirectSearch) {
  const auto& w = workload();
  const auto p = SearchParams::dst(10, 32, 2, 2);
  const auto r = search_batch_across(w.index, w.queries.slice(0, 1), p, across(4));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], search(w.index, w.queries.row(0), p));
}

TEST(Across, SixtyFourOnFourPipelinesMatchesSequential) {
  const auto& w = workload();
  const auto p = SearchParams::mcs(10, 32, 2);
  const VectorSet batch = w.queries.slice(0, 64);
  const auto r = search_batch_across(w.index, batch, p, across(4));
  ASSERT_EQ(r.size(), 64u);
  for (std::size_t q = 0; q < 64; ++q) EXPECT_EQ(r[q], search(w.index, batch.row(q), p)) << q;
}

TEST(Across, PermutedBatchPermutesResults) {
  const auto& w = workload();
  const auto p = SearchParams::bfs(10, 32);
  const VectorSet batch = w.queries.slice(0, 32);
  std::vector<std::size_t> perm(32);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(4));
  VectorSet shuffled = batch;
  for (std::size_t i = 0; i < 32; ++i) {
    std::copy(batch.row(perm[i]).begin(), batch.row(perm[i]).end(), shuffled.row(i).begin());
  }
  const auto a = search_batch_across(w.index, batch, p, across(3));
  const auto b = search_batch_across(w.index, shuffled, p, across(3));
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(b[i], a[perm[i]]);
}

TEST(Across, RejectsWrongModeAndDim) {
  const auto& w = workload();
  EXPECT_THROW(search_batch_across(w.index, w.queries, SearchParams::bfs(10, 32), intra(2)), std::invalid_argument);
  EXPECT_THROW(search_batch_across(w.index, generate_synthetic(2, 3, 1, Distribution::Gaussian),
                                   SearchParams::bfs(10, 32), across(2)),
               std::invalid_argument);
}

TEST(Intra, OneUnitEqualsSequentialDst) {
  const auto& w = workload();
  const auto p = SearchParams::dst(10, 32, 4, 2);
  for (std::size_t q = 0; q < 10; ++q) {
    EXPECT_EQ(search_intra(w.index, w.queries.row(q), p, intra(1)), dst_search(w.index, w.queries.row(q), p));
  }
}

TEST(Intra, FourUnitsFifoEqualsOneUnit) {
  const auto& w = workload();
  WorkerPool one(1), four(4);
  for (const auto& p : {SearchParams::dst(10, 32, 4, 1), SearchParams::dst(10, 32, 2, 4)}) {
    for (std::size_t q = 0; q < w.queries.count; ++q) {
      EXPECT_EQ(search_intra(w.index, w.queries.row(q), p, four), search_intra(w.index, w.queries.row(q), p, one));
    }
  }
}

TEST(Intra, BfsRunsAsSingleGroup) {
  const auto& w = workload();
  const auto p = SearchParams::bfs(10, 32);
  WorkerPool four(4);
  for (std::size_t q = 0; q < 10; ++q) {
    EXPECT_EQ(search_intra(w.index, w.queries.row(q), p, four).neighbors, bfs_search(w.index, w.queries.row(q), p).neighbors);
  }
}

TEST(Intra, ConcurrentRecallCloseToDeterministic) {
  const auto& w = workload();
  auto fifo = SearchParams::dst(10, 32, 4, 2);
  auto conc = fifo;
  conc.completion = CompletionPolicy::Concurrent;
  WorkerPool four(4);
  double r_fifo = 0, r_conc = 0;
  for (std::size_t q = 0; q < w.queries.count; ++q) {
    r_fifo += recall_at_k(search_intra(w.index, w.queries.row(q), fifo, four).neighbors, w.gt.row(q), 10);
    const auto r = search_intra(w.index, w.queries.row(q), conc, four);
    EXPECT_TRUE(std::is_sorted(r.neighbors.begin(), r.neighbors.end(), closer));
    r_conc += recall_at_k(r.neighbors, w.gt.row(q), 10);
  }
  EXPECT_NEAR(r_conc / w.queries.count, r_fifo / w.queries.count, 0.01);
}

TEST(Partitioned, OnePartEqualsSingleGraph) {
  const VectorSet vs = generate_synthetic(800, 8, 71, Distribution::Gaussian);
  const SubgraphSet s = split_subgraphs(vs, 1, 12, 24, 1);
  const GraphIndex g = build_graph(vs, 12, 24, 1);
  const VectorSet qs = generate_synthetic(10, 8, 72, Distribution::Gaussian);
  const auto p = SearchParams::bfs(10, 32);
  for (std::size_t q = 0; q < qs.count; ++q) EXPECT_EQ(search_partitioned(s, qs.row(q), p), search(g, qs.row(q), p));
}

TEST(Partitioned, SingletonPartsAreExact) {
  const VectorSet vs = generate_synthetic(40, 4, 73, Distribution::Gaussian);
  const SubgraphSet s = split_subgraphs(vs, 40, 2, 2, 1);
  const VectorSet qs = generate_synthetic(5, 4, 74, Distribution::Gaussian);
  for (std::size_t q = 0; q < qs.count; ++q) {
    const auto r = search_partitioned(s, qs.row(q), SearchParams::bfs(1, 1));
    EXPECT_EQ(r.stats.hops, 40u);
    const auto truth = brute_force_knn(vs, qs.row(q), 1);
    EXPECT_EQ(r.neighbors, truth);
  }
}

TEST(Partitioned, VisitsAtLeastSingleGraphAtEqualL) {
  const VectorSet vs = generate_synthetic(4000, 16, 75, Distribution::Gaussian);
  const VectorSet qs = generate_synthetic(50, 16, 76, Distribution::Gaussian);
  const GraphIndex g = build_graph(vs, 16, 32, 1);
  const SubgraphSet s = split_subgraphs(vs, 4, 16, 32, 1);
  const auto p = SearchParams::bfs(10, 32);
  double single = 0, parts = 0;
  for (std::size_t q = 0; q < qs.count; ++q) {
    single += static_cast<double>(search(g, qs.row(q), p).stats.visited);
    parts += static_cast<double>(search_partitioned(s, qs.row(q), p).stats.visited);
  }
  EXPECT_GE(parts, single);
}

TEST(Engine, RejectsPartitionedMode) {
  EngineConfig c;
  c.mode = ExecMode::Partitioned;
  EXPECT_THROW(SearchEngine(std::make_shared<const GraphIndex>(workload().index), c), std::invalid_argument);
}

TEST(Engine, SubmitMatchesDirectSearchInBothModes) {
  const auto& w = workload();
  auto index = std::make_shared<const GraphIndex>(w.index);
  const auto p = SearchParams::dst(10, 32, 2, 2);
  for (const EngineConfig& c : {across(2), intra(4)}) {
    SearchEngine engine(index, c);
    std::vector<std::future<SearchResult>> futures;
    for (std::size_t q = 0; q < 20; ++q) {
      futures.push_back(engine.submit(std::vector<float>(w.queries.row(q).begin(), w.queries.row(q).end()), p));
    }
    for (std::size_t q = 0; q < 20; ++q) EXPECT_EQ(futures[q].get(), search(w.index, w.queries.row(q), p));
  }
}

TEST(Across, ThroughputScalesWithPipelines) {
  if (std::thread::hardware_concurrency() < 4) {
    GTEST_SKIP() << "host exposes " << std::thread::hardware_concurrency() << " hardware threads, need 4";
  }
  const auto& w = workload();
  const VectorSet batch = generate_synthetic(10000, 16, 63, Distribution::Gaussian);
  const auto p = SearchParams::bfs(10, 32);
  auto qps = [&](std::size_t pipelines) {
    const auto t0 = std::chrono::steady_clock::now();
    search_batch_across(w.index, batch, p, across(pipelines));
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return static_cast<double>(batch.count) / dt.count();
  };
  const double one = qps(1);
  const double four = qps(4);
  EXPECT_GE(four, 1.5 * one);
}
