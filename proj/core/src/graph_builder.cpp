#include <algorithm>
#include <stdexcept>
#include <string>

#include "falcon/graph_index.hpp"
#include "falcon/traversal.hpp"

namespace falcon {

namespace {

// Keeps the max_degree closest of u's current neighbors plus `incoming`.
void add_reverse_edge(GraphIndex& graph, NodeId u, NodeId incoming) {
  const auto current = graph.neighbors(u);
  if (std::find(current.begin(), current.end(), incoming) != current.end()) return;

  std::vector<NodeId> ids(current.begin(), current.end());
  if (ids.size() < graph.max_degree()) {
    ids.push_back(incoming);
    graph.set_neighbors(u, ids);
    return;
  }
  const Metric metric = graph.metric();
  const float* base = graph.vector(u);
  std::vector<Neighbor> scored;
  scored.reserve(ids.size() + 1);
  for (NodeId n : ids) scored.push_back({n, distance_unchecked(metric, base, graph.vector(n), graph.dim())});
  scored.push_back({incoming, distance_unchecked(metric, base, graph.vector(incoming), graph.dim())});
  const auto worst = std::max_element(scored.begin(), scored.end(), CloserFirst{});
  if (worst->id == incoming) return;
  scored.erase(worst);
  // Original slot order is kept for the survivors.
  ids.clear();
  for (const auto& s : scored) ids.push_back(s.id);
  graph.set_neighbors(u, ids);
}

}  // namespace

GraphIndex build_graph(const VectorSet& vectors, std::uint32_t max_degree, std::uint32_t ef_construction,
                       std::uint64_t /*seed*/) {
  if (vectors.count == 0) throw std::invalid_argument("build_graph: empty vector set");
  if (max_degree < 2) throw std::invalid_argument("build_graph: max_degree must be >= 2");
  if (ef_construction < max_degree) {
    throw std::invalid_argument("build_graph: ef_construction (" + std::to_string(ef_construction) +
                                ") must be >= max_degree (" + std::to_string(max_degree) + ")");
  }

  GraphIndex graph(vectors, max_degree, 0);
  SearchParams params = SearchParams::bfs(1, ef_construction);
  params.tracker.kind = TrackerKind::ByteArray;

  // Nodes not yet inserted have no edges in or out, so a search from node 0
  // only ever sees the partial graph.
  std::vector<NodeId> links;
  for (NodeId v = 1; v < vectors.count; ++v) {
    params.k = std::min<std::size_t>(ef_construction, v);
    const SearchResult found = bfs_search(graph, vectors.row(v), params);

    links.clear();
    for (const auto& n : found.neighbors) {
      if (n.id == v) continue;
      links.push_back(n.id);
      if (links.size() == max_degree) break;
    }
    graph.set_neighbors(v, links);
    for (NodeId u : links) add_reverse_edge(graph, u, v);
  }
  graph.set_entry_node(select_entry(graph, EntryStrategy::Medoid));
  return graph;
}

}  // namespace falcon
