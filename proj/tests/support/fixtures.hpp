#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "falcon/dataset.hpp"
#include "falcon/graph_index.hpp"

namespace falcon::testing {

/// 1-D vectors 0, 1, ..., n-1 joined as a path 0-1-2-...
GraphIndex chain_graph(std::size_t n);

/// Every node adjacent to every other node.
GraphIndex complete_graph(VectorSet vectors);

/// Random out-edges (no self-loops, no duplicates), random vectors, random entry.
/// Not a proximity graph: built to exercise traversal corner cases.
GraphIndex random_graph(std::size_t n, std::size_t dim, std::uint32_t max_degree, std::uint64_t seed,
                        Metric metric = Metric::L2);

VectorSet vectors_1d(const std::vector<float>& values);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace falcon::testing
