#include "falcon/bounded_queue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace falcon {

namespace {

struct FartherFirst {
  bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return closer(b, a); }
};

}  // namespace

BoundedQueue::BoundedQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("BoundedQueue: capacity must be >= 1");
  entries_.reserve(capacity + 1);
}

InsertOutcome BoundedQueue::insert(NodeId id, float distance) {
  if (!std::isfinite(distance)) {
    throw std::invalid_argument("BoundedQueue::insert: non-finite distance for id " +
                                std::to_string(id));
  }
  const Neighbor entry{id, distance};
  if (full() && !closer(entry, entries_.front())) return InsertOutcome::Rejected;
  if (contains(id)) return InsertOutcome::Rejected;

  const auto pos = std::upper_bound(entries_.begin(), entries_.end(), entry, FartherFirst{});
  entries_.insert(pos, entry);
  if (entries_.size() > capacity_) entries_.erase(entries_.begin());
  return InsertOutcome::Accepted;
}

Neighbor BoundedQueue::extract_min() {
  if (entries_.empty()) throw std::out_of_range("BoundedQueue::extract_min on empty queue");
  const Neighbor best = entries_.back();
  entries_.pop_back();
  return best;
}

std::vector<Neighbor> BoundedQueue::extract_min_threshold(std::size_t max_count, float threshold) {
  std::vector<Neighbor> out;
  while (out.size() < max_count && !entries_.empty() && entries_.back().distance <= threshold) {
    out.push_back(entries_.back());
    entries_.pop_back();
  }
  return out;
}

float BoundedQueue::max_distance(std::size_t fill) const noexcept {
  if (entries_.size() < fill || entries_.empty()) return kInfinity;
  return entries_.front().distance;
}

float BoundedQueue::min_distance() const noexcept {
  return entries_.empty() ? kInfinity : entries_.back().distance;
}

std::vector<Neighbor> BoundedQueue::sorted_top_k(std::size_t k) const {
  if (k > entries_.size()) {
    throw std::invalid_argument("BoundedQueue::sorted_top_k: k=" + std::to_string(k) +
                                " exceeds size " + std::to_string(entries_.size()));
  }
  return {entries_.rbegin(), entries_.rbegin() + static_cast<std::ptrdiff_t>(k)};
}

bool BoundedQueue::contains(NodeId id) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(),
                     [id](const Neighbor& n) { return n.id == id; });
}

Neighbor BoundedQueue::min() const {
  if (entries_.empty()) throw std::out_of_range("BoundedQueue::min on empty queue");
  return entries_.back();
}

Neighbor BoundedQueue::max() const {
  if (entries_.empty()) throw std::out_of_range("BoundedQueue::max on empty queue");
  return entries_.front();
}

}  // namespace falcon
