#include "falcon/visited.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace falcon {

BloomFilter::BloomFilter(std::uint64_t bits, unsigned hashes) : bits_(bits), hashes_(hashes) {
  if (!std::has_single_bit(bits)) {
    throw std::invalid_argument("BloomFilter: bits must be a power of two, got " +
                                std::to_string(bits));
  }
  if (hashes < 1 || hashes > kBloomSeeds.size()) {
    throw std::invalid_argument("BloomFilter: hashes must be in [1, 8], got " +
                                std::to_string(hashes));
  }
  words_.assign(std::max<std::uint64_t>(1, bits / 64), 0);
}

void BloomFilter::insert(NodeId id) noexcept {
  for (unsigned i = 0; i < hashes_; ++i) {
    const auto bit = bit_index(id, i);
    words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  }
  ++inserted_;
}

bool BloomFilter::contains(NodeId id) const noexcept {
  for (unsigned i = 0; i < hashes_; ++i) {
    const auto bit = bit_index(id, i);
    if ((words_[bit >> 6] & (std::uint64_t{1} << (bit & 63))) == 0) return false;
  }
  return true;
}

void BloomFilter::reset() noexcept {
  std::fill(words_.begin(), words_.end(), 0);
  inserted_ = 0;
}

std::uint64_t BloomFilter::popcount() const noexcept {
  std::uint64_t n = 0;
  for (auto w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
  return n;
}

VisitedTracker::VisitedTracker(const TrackerConfig& config, std::size_t node_count)
    : config_(config),
      node_count_(node_count),
      impl_([&]() -> std::variant<BloomFilter, Exact, Bytes> {
        switch (config.kind) {
          case TrackerKind::Bloom:
            return BloomFilter(config.bloom_bits, config.bloom_hashes);
          case TrackerKind::Exact:
            return Exact{};
          case TrackerKind::ByteArray:
            return Bytes{std::vector<std::uint8_t>(node_count, 0)};
        }
        throw std::invalid_argument("VisitedTracker: unknown kind");
      }()) {
  if (config.shadow) shadow_ = std::make_unique<std::unordered_set<NodeId>>();
}

void VisitedTracker::insert(NodeId id) {
  std::visit(
      [&](auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, BloomFilter>) {
          impl.insert(id);
        } else if constexpr (std::is_same_v<T, Exact>) {
          impl.ids.insert(id);
        } else {
          if (id >= impl.flags.size()) {
            throw std::out_of_range("VisitedTracker: id " + std::to_string(id) +
                                    " out of range for byte array of " +
                                    std::to_string(impl.flags.size()));
          }
          impl.flags[id] = 1;
        }
      },
      impl_);
  if (shadow_) shadow_->insert(id);
}

bool VisitedTracker::contains(NodeId id) const {
  return std::visit(
      [&](const auto& impl) -> bool {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, BloomFilter>) {
          return impl.contains(id);
        } else if constexpr (std::is_same_v<T, Exact>) {
          return impl.ids.contains(id);
        } else {
          if (id >= impl.flags.size()) {
            throw std::out_of_range("VisitedTracker: id " + std::to_string(id) +
                                    " out of range for byte array of " +
                                    std::to_string(impl.flags.size()));
          }
          return impl.flags[id] != 0;
        }
      },
      impl_);
}

bool VisitedTracker::check(NodeId id) {
  const bool hit = contains(id);
  if (hit && shadow_ && !shadow_->contains(id)) ++false_positives_;
  return hit;
}

void VisitedTracker::reset() {
  std::visit(
      [](auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, BloomFilter>) {
          impl.reset();
        } else if constexpr (std::is_same_v<T, Exact>) {
          impl.ids.clear();
        } else {
          std::fill(impl.flags.begin(), impl.flags.end(), 0);
        }
      },
      impl_);
  if (shadow_) shadow_->clear();
  false_positives_ = 0;
}

TrackerKind parse_tracker_kind(std::string_view name) {
  if (name == "bloom") return TrackerKind::Bloom;
  if (name == "exact") return TrackerKind::Exact;
  if (name == "bytearray" || name == "bytes") return TrackerKind::ByteArray;
  throw std::invalid_argument("unknown tracker kind: " + std::string(name));
}

}  // namespace falcon
