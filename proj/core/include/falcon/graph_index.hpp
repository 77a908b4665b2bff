#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "falcon/dataset.hpp"
#include "falcon/types.hpp"

namespace falcon {

inline constexpr std::uint32_t kDefaultChannels = 4;

/// Fixed-degree proximity graph over a VectorSet.
///
/// Adjacency is stored as `count * max_degree` slots; slots past a node's degree
/// hold kInvalidNode. Node v lives on memory channel v % channel_count.
class GraphIndex {
 public:
  GraphIndex() = default;

  /// Empty topology (all degrees zero) over `vectors`.
  GraphIndex(VectorSet vectors, std::uint32_t max_degree, NodeId entry_node = 0,
             std::uint32_t channel_count = kDefaultChannels);

  std::size_t size() const noexcept { return vectors_.count; }
  std::size_t dim() const noexcept { return vectors_.dim; }
  Metric metric() const noexcept { return vectors_.metric_or_default(); }
  std::uint32_t max_degree() const noexcept { return max_degree_; }
  NodeId entry_node() const noexcept { return entry_node_; }
  std::uint32_t channel_count() const noexcept { return channel_count_; }
  const VectorSet& vectors() const noexcept { return vectors_; }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {adjacency_.data() + static_cast<std::size_t>(v) * max_degree_, degrees_[v]};
  }
  std::uint32_t degree(NodeId v) const noexcept { return degrees_[v]; }
  const std::vector<std::uint32_t>& degrees() const noexcept { return degrees_; }
  const std::vector<NodeId>& adjacency_slots() const noexcept { return adjacency_; }
  const float* vector(NodeId v) const noexcept { return vectors_.data.data() + std::size_t{v} * dim(); }

  std::uint32_t channel_of(NodeId v) const noexcept { return v % channel_count_; }
  std::vector<std::uint32_t> layout() const;
  std::size_t edge_count() const noexcept;

  /// Replaces v's neighbor list. Throws std::invalid_argument past max_degree.
  void set_neighbors(NodeId v, std::span<const NodeId> ids);
  void set_entry_node(NodeId v);
  void set_channel_count(std::uint32_t channels);

  /// Throws std::logic_error naming the first violated invariant.
  void validate() const;

  bool operator==(const GraphIndex&) const = default;

 private:
  VectorSet vectors_;
  std::uint32_t max_degree_ = 0;
  std::vector<std::uint32_t> degrees_;
  std::vector<NodeId> adjacency_;
  NodeId entry_node_ = 0;
  std::uint32_t channel_count_ = kDefaultChannels;
};

enum class EntryStrategy { First, Medoid };

/// First -> 0. Medoid -> node closest (squared L2) to the centroid, ties by id.
NodeId select_entry(const GraphIndex& index, EntryStrategy strategy);
NodeId select_entry(const VectorSet& vectors, EntryStrategy strategy);

/// Greedy incremental builder: each node, in id order, is searched for in the
/// partial graph (result queue of ef_construction), linked to its max_degree
/// closest finds, and back-linked with worst-neighbor eviction. Node 0 is the
/// build-time entry; the returned graph's entry is the medoid.
///
/// The builder is fully deterministic; `seed` is accepted for interface stability
/// and currently does not influence the result.
GraphIndex build_graph(const VectorSet& vectors, std::uint32_t max_degree,
                       std::uint32_t ef_construction, std::uint64_t seed);

/// FGVS container.
void save_index(const GraphIndex& index, const std::filesystem::path& path);
GraphIndex load_index(const std::filesystem::path& path);
std::vector<std::byte> serialize_index(const GraphIndex& index);
GraphIndex deserialize_index(std::span<const std::byte> bytes);

struct ImportResult {
  GraphIndex index;
  /// Self-loops and duplicate neighbors dropped while importing.
  std::size_t dropped = 0;
};

/// Adjacency file: [node_count u32][max_degree u32], then per node [degree u32][ids u32...].
ImportResult import_adjacency(VectorSet vectors, const std::filesystem::path& path, NodeId entry_node);
void export_adjacency(const GraphIndex& index, const std::filesystem::path& path);

struct SubgraphSet {
  std::vector<GraphIndex> parts;
  /// global id -> (part, local id)
  std::vector<std::pair<std::uint32_t, NodeId>> owner;
  /// part -> local id -> global id
  std::vector<std::vector<NodeId>> global_ids;

  std::size_t total_nodes() const noexcept { return owner.size(); }
};

/// Round-robin partition (global v -> part v % parts), one build_graph per part.
SubgraphSet split_subgraphs(const VectorSet& vectors, std::uint32_t parts, std::uint32_t max_degree,
                            std::uint32_t ef_construction, std::uint64_t seed);

}  // namespace falcon
