#include "falcon/graph_index.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "falcon/binary_io.hpp"

namespace falcon {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'G', 'V', 'S'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 7 * 4;

}  // namespace

GraphIndex::GraphIndex(VectorSet vectors, std::uint32_t max_degree, NodeId entry_node,
                       std::uint32_t channel_count)
    : vectors_(std::move(vectors)),
      max_degree_(max_degree),
      degrees_(vectors_.count, 0),
      adjacency_(vectors_.count * max_degree, kInvalidNode),
      entry_node_(entry_node),
      channel_count_(channel_count) {
  if (vectors_.count == 0) throw std::invalid_argument("GraphIndex: empty vector set");
  if (max_degree == 0) throw std::invalid_argument("GraphIndex: max_degree must be >= 1");
  if (channel_count == 0) throw std::invalid_argument("GraphIndex: channel_count must be >= 1");
  if (entry_node >= vectors_.count) throw std::invalid_argument("GraphIndex: entry node out of range");
  vectors_.metric = vectors_.metric_or_default();
}

std::vector<std::uint32_t> GraphIndex::layout() const {
  std::vector<std::uint32_t> out(size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = channel_of(static_cast<NodeId>(v));
  return out;
}

std::size_t GraphIndex::edge_count() const noexcept {
  std::size_t n = 0;
  for (auto d : degrees_) n += d;
  return n;
}

void GraphIndex::set_neighbors(NodeId v, std::span<const NodeId> ids) {
  if (v >= size()) throw std::out_of_range("GraphIndex::set_neighbors: node out of range");
  if (ids.size() > max_degree_) {
    throw std::invalid_argument("GraphIndex::set_neighbors: " + std::to_string(ids.size()) +
                                " neighbors exceed max_degree " + std::to_string(max_degree_));
  }
  auto slots = adjacency_.begin() + static_cast<std::ptrdiff_t>(std::size_t{v} * max_degree_);
  std::copy(ids.begin(), ids.end(), slots);
  std::fill(slots + static_cast<std::ptrdiff_t>(ids.size()), slots + max_degree_, kInvalidNode);
  degrees_[v] = static_cast<std::uint32_t>(ids.size());
}

void GraphIndex::set_entry_node(NodeId v) {
  if (v >= size()) throw std::out_of_range("GraphIndex::set_entry_node: node out of range");
  entry_node_ = v;
}

void GraphIndex::set_channel_count(std::uint32_t channels) {
  if (channels == 0) throw std::invalid_argument("GraphIndex: channel_count must be >= 1");
  channel_count_ = channels;
}

void GraphIndex::validate() const {
  if (entry_node_ >= size()) throw std::logic_error("entry node out of range");
  if (vectors_.data.size() != vectors_.count * vectors_.dim) {
    throw std::logic_error("vector data length mismatch");
  }
  std::unordered_set<NodeId> seen;
  for (NodeId v = 0; v < size(); ++v) {
    if (degrees_[v] > max_degree_) {
      throw std::logic_error("node " + std::to_string(v) + " exceeds max_degree");
    }
    seen.clear();
    for (NodeId n : neighbors(v)) {
      if (n >= size()) throw std::logic_error("node " + std::to_string(v) + " has out-of-range neighbor");
      if (n == v) throw std::logic_error("node " + std::to_string(v) + " has a self-loop");
      if (!seen.insert(n).second) {
        throw std::logic_error("node " + std::to_string(v) + " has duplicate neighbor " +
                               std::to_string(n));
      }
    }
    for (std::size_t s = degrees_[v]; s < max_degree_; ++s) {
      if (adjacency_[std::size_t{v} * max_degree_ + s] != kInvalidNode) {
        throw std::logic_error("node " + std::to_string(v) + " has a non-sentinel padding slot");
      }
    }
  }
}

NodeId select_entry(const VectorSet& vectors, EntryStrategy strategy) {
  if (vectors.count == 0) throw std::invalid_argument("select_entry: empty vector set");
  if (strategy == EntryStrategy::First) return 0;

  std::vector<double> centroid(vectors.dim, 0.0);
  for (std::size_t i = 0; i < vectors.count; ++i) {
    const auto row = vectors.row(i);
    for (std::size_t j = 0; j < vectors.dim; ++j) centroid[j] += row[j];
  }
  std::vector<float> c(vectors.dim);
  for (std::size_t j = 0; j < vectors.dim; ++j) {
    c[j] = static_cast<float>(centroid[j] / static_cast<double>(vectors.count));
  }
  Neighbor best;
  for (std::size_t i = 0; i < vectors.count; ++i) {
    const Neighbor cand{static_cast<NodeId>(i),
                        distance_unchecked(Metric::L2, c.data(), vectors.row(i).data(), vectors.dim)};
    if (closer(cand, best)) best = cand;
  }
  return best.id;
}

NodeId select_entry(const GraphIndex& index, EntryStrategy strategy) {
  return select_entry(index.vectors(), strategy);
}

std::vector<std::byte> serialize_index(const GraphIndex& index) {
  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + index.size() * (1 + index.max_degree() + index.dim()) * 4);
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  io::append_u32(out, kFormatVersion);
  io::append_u32(out, static_cast<std::uint32_t>(index.metric()));
  io::append_u32(out, static_cast<std::uint32_t>(index.size()));
  io::append_u32(out, static_cast<std::uint32_t>(index.dim()));
  io::append_u32(out, index.max_degree());
  io::append_u32(out, index.entry_node());
  io::append_u32(out, index.channel_count());
  const auto& slots = index.adjacency_slots();
  for (NodeId v = 0; v < index.size(); ++v) {
    io::append_u32(out, index.degree(v));
    for (std::size_t s = 0; s < index.max_degree(); ++s) {
      io::append_u32(out, slots[std::size_t{v} * index.max_degree() + s]);
    }
    for (std::size_t j = 0; j < index.dim(); ++j) io::append_f32(out, index.vector(v)[j]);
  }
  return out;
}

GraphIndex deserialize_index(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("FGVS: truncated header");
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (bytes[i] != static_cast<std::byte>(kMagic[i])) throw FormatError("FGVS: bad magic");
  }
  io::ByteReader r(bytes.subspan(4));
  const auto version = r.u32();
  if (version != kFormatVersion) {
    throw FormatError("FGVS: unsupported format version " + std::to_string(version));
  }
  const auto metric_code = r.u32();
  if (metric_code > static_cast<std::uint32_t>(Metric::Cosine)) {
    throw FormatError("FGVS: unknown metric code " + std::to_string(metric_code));
  }
  const std::size_t count = r.u32();
  const std::size_t dim = r.u32();
  const std::uint32_t max_degree = r.u32();
  const NodeId entry = r.u32();
  const std::uint32_t channels = r.u32();
  if (count == 0 || dim == 0 || max_degree == 0 || channels == 0) {
    throw FormatError("FGVS: zero count, dim, max_degree or channel_count");
  }
  const std::size_t record = (1 + max_degree + dim) * 4;
  if (r.remaining() != count * record) {
    throw FormatError("FGVS: expected " + std::to_string(count * record) + " body bytes, found " +
                      std::to_string(r.remaining()));
  }
  if (entry >= count) throw FormatError("FGVS: entry node out of range");

  std::vector<std::uint32_t> degrees(count);
  std::vector<std::vector<NodeId>> lists(count);
  std::vector<float> data(count * dim);
  for (std::size_t v = 0; v < count; ++v) {
    degrees[v] = r.u32();
    if (degrees[v] > max_degree) throw FormatError("FGVS: node " + std::to_string(v) + " degree too large");
    for (std::uint32_t s = 0; s < max_degree; ++s) {
      const NodeId n = r.u32();
      if (s < degrees[v]) lists[v].push_back(n);
    }
    for (std::size_t j = 0; j < dim; ++j) data[v * dim + j] = r.f32();
  }
  GraphIndex index(VectorSet(count, dim, std::move(data), static_cast<Metric>(metric_code)),
                   max_degree, entry, channels);
  for (std::size_t v = 0; v < count; ++v) index.set_neighbors(static_cast<NodeId>(v), lists[v]);
  try {
    index.validate();
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("FGVS: ") + e.what());
  }
  return index;
}

void save_index(const GraphIndex& index, const std::filesystem::path& path) {
  io::write_file(path, serialize_index(index));
}

GraphIndex load_index(const std::filesystem::path& path) {
  return deserialize_index(io::read_file(path));
}

ImportResult import_adjacency(VectorSet vectors, const std::filesystem::path& path, NodeId entry_node) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes);
  if (r.remaining() < 8) throw FormatError("adjacency: truncated header");
  const std::size_t node_count = r.u32();
  const std::uint32_t max_degree = r.u32();
  if (node_count != vectors.count) {
    throw FormatError("adjacency: node count " + std::to_string(node_count) +
                      " does not match vector count " + std::to_string(vectors.count));
  }
  if (max_degree == 0) throw FormatError("adjacency: max_degree must be >= 1");

  ImportResult result{GraphIndex(std::move(vectors), max_degree, entry_node), 0};
  std::vector<NodeId> kept;
  std::unordered_set<NodeId> seen;
  for (std::size_t v = 0; v < node_count; ++v) {
    if (r.remaining() < 4) {
      throw FormatError("adjacency: truncated at node " + std::to_string(v) + ", byte offset " +
                        std::to_string(r.offset()));
    }
    const std::uint32_t degree = r.u32();
    if (degree > max_degree) {
      throw FormatError("adjacency: node " + std::to_string(v) + " degree " + std::to_string(degree) +
                        " exceeds declared max_degree " + std::to_string(max_degree));
    }
    if (r.remaining() < std::size_t{degree} * 4) {
      throw FormatError("adjacency: truncated neighbor list of node " + std::to_string(v));
    }
    kept.clear();
    seen.clear();
    for (std::uint32_t i = 0; i < degree; ++i) {
      const NodeId n = r.u32();
      if (n >= node_count) {
        throw FormatError("adjacency: node " + std::to_string(v) + " references out-of-range id " +
                          std::to_string(n));
      }
      if (n == v || !seen.insert(n).second) {
        ++result.dropped;
        continue;
      }
      kept.push_back(n);
    }
    result.index.set_neighbors(static_cast<NodeId>(v), kept);
  }
  if (!r.at_end()) throw FormatError("adjacency: trailing bytes after last node");
  return result;
}

void export_adjacency(const GraphIndex& index, const std::filesystem::path& path) {
  std::vector<std::byte> out;
  io::append_u32(out, static_cast<std::uint32_t>(index.size()));
  io::append_u32(out, index.max_degree());
  for (NodeId v = 0; v < index.size(); ++v) {
    io::append_u32(out, index.degree(v));
    for (NodeId n : index.neighbors(v)) io::append_u32(out, n);
  }
  io::write_file(path, out);
}

SubgraphSet split_subgraphs(const VectorSet& vectors, std::uint32_t parts, std::uint32_t max_degree,
                            std::uint32_t ef_construction, std::uint64_t seed) {
  if (parts < 1 || parts > vectors.count) {
    throw std::invalid_argument("split_subgraphs: parts=" + std::to_string(parts) +
                                " must be in [1, " + std::to_string(vectors.count) + "]");
  }
  SubgraphSet set;
  set.owner.resize(vectors.count);
  set.global_ids.resize(parts);
  std::vector<std::vector<float>> data(parts);
  for (std::size_t v = 0; v < vectors.count; ++v) {
    const auto part = static_cast<std::uint32_t>(v % parts);
    set.owner[v] = {part, static_cast<NodeId>(set.global_ids[part].size())};
    set.global_ids[part].push_back(static_cast<NodeId>(v));
    const auto row = vectors.row(v);
    data[part].insert(data[part].end(), row.begin(), row.end());
  }
  set.parts.reserve(parts);
  for (std::uint32_t p = 0; p < parts; ++p) {
    VectorSet local(set.global_ids[p].size(), vectors.dim, std::move(data[p]), vectors.metric);
    set.parts.push_back(build_graph(local, max_degree, ef_construction, seed));
  }
  return set;
}

}  // namespace falcon
