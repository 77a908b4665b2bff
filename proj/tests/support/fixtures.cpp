#include "fixtures.hpp"

#include <atomic>
#include <numeric>
#include <random>

#include <unistd.h>

namespace falcon::testing {

VectorSet vectors_1d(const std::vector<float>& values) {
  return VectorSet(values.size(), 1, values, Metric::L2);
}

GraphIndex chain_graph(std::size_t n) {
  std::vector<float> values(n);
  std::iota(values.begin(), values.end(), 0.0f);
  GraphIndex g(vectors_1d(values), 2);
  for (NodeId v = 0; v < n; ++v) {
    std::vector<NodeId> adj;
    if (v > 0) adj.push_back(v - 1);
    if (v + 1 < n) adj.push_back(v + 1);
    g.set_neighbors(v, adj);
  }
  return g;
}

GraphIndex complete_graph(VectorSet vectors) {
  const std::size_t n = vectors.count;
  GraphIndex g(std::move(vectors), static_cast<std::uint32_t>(std::max<std::size_t>(1, n - 1)));
  for (NodeId v = 0; v < n; ++v) {
    std::vector<NodeId> adj;
    for (NodeId u = 0; u < n; ++u) {
      if (u != v) adj.push_back(u);
    }
    g.set_neighbors(v, adj);
  }
  return g;
}

GraphIndex random_graph(std::size_t n, std::size_t dim, std::uint32_t max_degree, std::uint64_t seed,
                        Metric metric) {
  std::mt19937_64 rng(seed);
  VectorSet vs = generate_synthetic(n, dim, seed ^ 0x9e3779b97f4a7c15ull, Distribution::Gaussian);
  vs.metric = metric;
  const auto entry = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  GraphIndex g(std::move(vs), max_degree, entry);
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), 0u);
  for (NodeId v = 0; v < n; ++v) {
    const std::size_t cap = std::min<std::size_t>(max_degree, n - 1);
    const std::size_t degree = std::uniform_int_distribution<std::size_t>(cap == 0 ? 0 : 1, cap)(rng);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<NodeId> adj;
    for (NodeId u : ids) {
      if (adj.size() == degree) break;
      if (u != v) adj.push_back(u);
    }
    g.set_neighbors(v, adj);
  }
  return g;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("falcon_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace falcon::testing
