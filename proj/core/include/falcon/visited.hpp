#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <unordered_set>
#include <variant>
#include <vector>

#include "falcon/types.hpp"

namespace falcon {

/// MurmurHash2 of a single 4-byte little-endian key.
std::uint32_t murmur2(std::uint32_t key, std::uint32_t seed) noexcept;

/// Analytic Bloom false-positive rate (1 - e^{-h m / b})^h.
double theoretical_fpr(unsigned hashes, std::uint64_t bits, std::uint64_t inserted);

/// Fixed seeds for the up-to-eight hash functions of a BloomFilter.
inline constexpr std::array<std::uint32_t, 8> kBloomSeeds = {
    0x9747b28cu, 0x5bd1e995u, 0x1b873593u, 0xcc9e2d51u,
    0x85ebca6bu, 0xc2b2ae35u, 0x27d4eb2fu, 0x165667b1u,
};

class BloomFilter {
 public:
  /// `bits` must be a power of two, `hashes` in [1, 8].
  BloomFilter(std::uint64_t bits, unsigned hashes);

  void insert(NodeId id) noexcept;
  bool contains(NodeId id) const noexcept;
  void reset() noexcept;

  std::uint64_t bits() const noexcept { return bits_; }
  unsigned hashes() const noexcept { return hashes_; }
  std::uint64_t inserted() const noexcept { return inserted_; }
  std::uint64_t popcount() const noexcept;
  bool all_zero() const noexcept { return popcount() == 0; }

 private:
  std::uint64_t bit_index(NodeId id, unsigned i) const noexcept {
    return murmur2(id, kBloomSeeds[i]) & (bits_ - 1);
  }

  std::uint64_t bits_;
  unsigned hashes_;
  std::uint64_t inserted_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class TrackerKind { Bloom, Exact, ByteArray };

struct TrackerConfig {
  TrackerKind kind = TrackerKind::Bloom;
  std::uint64_t bloom_bits = std::uint64_t{1} << 18;
  unsigned bloom_hashes = 3;
  /// Keep an exact shadow set next to a Bloom filter to count true false positives.
  bool shadow = false;
};

/// Per-query visited-node set behind one interface.
class VisitedTracker {
 public:
  /// `node_count` bounds ids for the ByteArray variant.
  VisitedTracker(const TrackerConfig& config, std::size_t node_count);

  /// Throws std::out_of_range for ByteArray ids >= node_count.
  void insert(NodeId id);
  bool contains(NodeId id) const;
  void reset();

  /// Same as contains(); when a shadow set is present and the tracker reports a
  /// node the shadow has never seen, the false-positive counter is bumped.
  bool check(NodeId id);

  TrackerKind kind() const noexcept { return config_.kind; }
  std::uint64_t false_positives() const noexcept { return false_positives_; }
  const BloomFilter* bloom() const noexcept { return std::get_if<BloomFilter>(&impl_); }

 private:
  struct Exact {
    std::unordered_set<NodeId> ids;
  };
  struct Bytes {
    std::vector<std::uint8_t> flags;
  };

  TrackerConfig config_;
  std::size_t node_count_;
  std::variant<BloomFilter, Exact, Bytes> impl_;
  std::unique_ptr<std::unordered_set<NodeId>> shadow_;
  std::uint64_t false_positives_ = 0;
};

TrackerKind parse_tracker_kind(std::string_view name);

}  // namespace falcon
