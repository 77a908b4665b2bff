#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "falcon/types.hpp"

namespace falcon {

enum class InsertOutcome { Accepted, Rejected };

/// Fixed-capacity queue ordered by (distance, id), holding at most one entry per id.
///
/// Used for both the candidate queue and the result queue of a traversal. A full
/// queue admits a new entry only if it is strictly closer than the current worst,
/// which is then evicted.
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity);

  /// Throws std::invalid_argument for a non-finite distance.
  InsertOutcome insert(NodeId id, float distance);

  /// Throws std::out_of_range when empty.
  Neighbor extract_min();

  /// Removes up to `max_count` closest entries with distance <= threshold, ascending.
  std::vector<Neighbor> extract_min_threshold(std::size_t max_count, float threshold);

  /// Worst distance once the queue holds at least `fill` entries, +infinity before.
  float max_distance(std::size_t fill) const noexcept;

  /// Smallest distance, +infinity when empty.
  float min_distance() const noexcept;

  /// The k closest entries, ascending. Throws std::invalid_argument if k > size().
  std::vector<Neighbor> sorted_top_k(std::size_t k) const;

  bool contains(NodeId id) const noexcept;
  Neighbor min() const;
  Neighbor max() const;

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return entries_.empty(); }
  bool full() const noexcept { return entries_.size() == capacity_; }
  void clear() noexcept { entries_.clear(); }

 private:
  std::size_t capacity_;
  // Worst first, best last: extract_min is a pop_back.
  std::vector<Neighbor> entries_;
};

}  // namespace falcon
