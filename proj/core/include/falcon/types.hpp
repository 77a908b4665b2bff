#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <tuple>

namespace falcon {

using NodeId = std::uint32_t;

inline constexpr NodeId kInvalidNode = 0xFFFFFFFFu;
inline constexpr float kInfinity = std::numeric_limits<float>::infinity();

enum class Metric : std::uint32_t { L2 = 0, InnerProduct = 1, Cosine = 2 };

std::string_view to_string(Metric metric) noexcept;
Metric parse_metric(std::string_view name);

/// (id, distance) pair. Every ordering in the library is by (distance, id).
struct Neighbor {
  NodeId id = kInvalidNode;
  float distance = kInfinity;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

inline bool closer(const Neighbor& a, const Neighbor& b) noexcept {
  return std::tie(a.distance, a.id) < std::tie(b.distance, b.id);
}

struct CloserFirst {
  bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return closer(a, b); }
};

}  // namespace falcon
