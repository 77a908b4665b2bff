#include <benchmark/benchmark.h>

#include <random>

#include "falcon/bounded_queue.hpp"

using namespace falcon;

static void BM_QueueInsert(benchmark::State& state) {
  const auto capacity = static_cast<std::size_t>(state.range(0));
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> ud(0, 1);
  std::vector<float> dists(4096);
  for (auto& d : dists) d = ud(rng);
  for (auto _ : state) {
    BoundedQueue q(capacity);
    for (NodeId i = 0; i < dists.size(); ++i) q.insert(i, dists[i]);
    benchmark::DoNotOptimize(q.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dists.size()));
}
BENCHMARK(BM_QueueInsert)->Arg(16)->Arg(64)->Arg(256);

static void BM_QueueExtractThreshold(benchmark::State& state) {
  const auto mc = static_cast<std::size_t>(state.range(0));
  std::mt19937 rng(2);
  std::uniform_real_distribution<float> ud(0, 1);
  for (auto _ : state) {
    state.PauseTiming();
    BoundedQueue q(64);
    for (NodeId i = 0; i < 64; ++i) q.insert(i, ud(rng));
    state.ResumeTiming();
    while (!q.empty()) benchmark::DoNotOptimize(q.extract_min_threshold(mc, 2.0f));
  }
}
BENCHMARK(BM_QueueExtractThreshold)->Arg(1)->Arg(4)->Arg(8);
