#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "falcon/types.hpp"

namespace falcon {

/// Raised when a binary container is truncated, inconsistent, or has a bad header.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major collection of `count` vectors of dimension `dim`.
///
/// An empty set read from disk has `dim == 0`, meaning the dimension is
/// unknown; `has_dim()` reports it.
struct VectorSet {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<float> data;
  std::optional<Metric> metric;

  VectorSet() = default;
  VectorSet(std::size_t count, std::size_t dim, std::vector<float> data,
            std::optional<Metric> metric = std::nullopt);

  bool has_dim() const noexcept { return dim != 0; }
  bool empty() const noexcept { return count == 0; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {data.data() + i * dim, dim};
  }
  std::span<float> row(std::size_t i) noexcept { return {data.data() + i * dim, dim}; }

  Metric metric_or_default() const noexcept { return metric.value_or(Metric::L2); }

  /// Returns a set holding rows [first, first + n).
  VectorSet slice(std::size_t first, std::size_t n) const;

  bool operator==(const VectorSet&) const = default;
};

/// Exact neighbor ids per query, rows ordered by (distance, id).
struct GroundTruth {
  std::size_t num_queries = 0;
  std::size_t k_gt = 0;
  std::vector<std::uint32_t> ids;

  std::span<const std::uint32_t> row(std::size_t q) const noexcept {
    return {ids.data() + q * k_gt, k_gt};
  }

  bool operator==(const GroundTruth&) const = default;
};

enum class Distribution { Uniform01, Gaussian };

VectorSet read_fvecs(const std::filesystem::path& path);
void write_fvecs(const VectorSet& vectors, const std::filesystem::path& path);

GroundTruth read_ivecs(const std::filesystem::path& path);
void write_ivecs(const GroundTruth& gt, const std::filesystem::path& path);

/// Deterministic for a fixed (n, d, seed, distribution) on a given standard library.
VectorSet generate_synthetic(std::size_t n, std::size_t d, std::uint64_t seed,
                             Distribution distribution);

/// Smaller-is-closer distance. L2 is squared Euclidean, InnerProduct is the
/// negated dot product, Cosine is 1 - cosine similarity.
///
/// Throws std::invalid_argument on dimension mismatch or a zero vector under Cosine.
float distance(Metric metric, std::span<const float> a, std::span<const float> b);

/// Same as distance() without argument validation. Used on traversal hot paths.
float distance_unchecked(Metric metric, const float* a, const float* b, std::size_t dim) noexcept;

/// Exact k nearest rows of `base` to `query`, ordered by (distance, id).
std::vector<Neighbor> brute_force_knn(const VectorSet& base, std::span<const float> query,
                                      std::size_t k);

/// brute_force_knn for every query row, keeping only ids.
GroundTruth compute_ground_truth(const VectorSet& base, const VectorSet& queries, std::size_t k);

Distribution parse_distribution(const std::string& name);

}  // namespace falcon
