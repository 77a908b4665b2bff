#include <benchmark/benchmark.h>

#include "falcon/visited.hpp"

using namespace falcon;

static void BM_Murmur2(benchmark::State& state) {
  std::uint32_t key = 0;
  for (auto _ : state) benchmark::DoNotOptimize(murmur2(key++, kBloomSeeds[0]));
}
BENCHMARK(BM_Murmur2);

static void BM_TrackerInsertCheck(benchmark::State& state) {
  TrackerConfig cfg;
  cfg.kind = static_cast<TrackerKind>(state.range(0));
  VisitedTracker t(cfg, 1 << 20);
  NodeId id = 0;
  for (auto _ : state) {
    const NodeId v = (id++ * 2654435761u) & ((1u << 20) - 1);
    if (!t.contains(v)) t.insert(v);
    if ((id & 1023) == 0) t.reset();
  }
  state.SetLabel(cfg.kind == TrackerKind::Bloom ? "bloom" : cfg.kind == TrackerKind::Exact ? "exact" : "bytes");
}
BENCHMARK(BM_TrackerInsertCheck)
    ->Arg(static_cast<int>(TrackerKind::Bloom))
    ->Arg(static_cast<int>(TrackerKind::Exact))
    ->Arg(static_cast<int>(TrackerKind::ByteArray));
