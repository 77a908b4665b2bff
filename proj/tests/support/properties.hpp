#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "falcon/types.hpp"

namespace falcon::testing {

/// Plain sorted-list model of a bounded queue: same capacity, eviction and
/// duplicate rules, no cleverness.
class ReferenceQueue {
 public:
  explicit ReferenceQueue(std::size_t capacity) : capacity_(capacity) {}

  bool insert(NodeId id, float distance);
  Neighbor extract_min();
  std::vector<Neighbor> extract_min_threshold(std::size_t max_count, float threshold);
  float max_distance(std::size_t fill) const;
  const std::vector<Neighbor>& sorted() const noexcept { return items_; }

 private:
  std::size_t capacity_;
  std::vector<Neighbor> items_;  // ascending (distance, id)
};

/// Runs `sequences` random operation sequences against BoundedQueue and the
/// reference model. Returns a description of the first divergence, if any.
std::optional<std::string> check_queue_against_model(std::uint64_t seed, std::size_t sequences);

/// Random insert/query/reset sequences on every tracker kind. Returns the first
/// false negative (or exact-kind false positive) found, if any.
std::optional<std::string> check_trackers_no_false_negatives(std::uint64_t seed, std::size_t sequences);

}  // namespace falcon::testing
