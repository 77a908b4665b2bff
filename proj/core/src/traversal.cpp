#include "falcon/traversal.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "falcon/bounded_queue.hpp"

namespace falcon {

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::BFS:
      return "bfs";
    case Algorithm::MCS:
      return "mcs";
    case Algorithm::DST:
      return "dst";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "bfs" || name == "BFS") return Algorithm::BFS;
  if (name == "mcs" || name == "MCS") return Algorithm::MCS;
  if (name == "dst" || name == "DST") return Algorithm::DST;
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

void SearchParams::validate() const {
  if (k == 0) throw std::invalid_argument("SearchParams: k must be >= 1");
  if (k > l) {
    throw std::invalid_argument("SearchParams: k=" + std::to_string(k) + " exceeds l=" + std::to_string(l));
  }
  if (mc == 0 || mg == 0) throw std::invalid_argument("SearchParams: mc and mg must be >= 1");
  if (algorithm == Algorithm::BFS && (mc != 1 || mg != 1)) {
    throw std::invalid_argument("SearchParams: BFS requires mc = mg = 1");
  }
  if (algorithm == Algorithm::MCS && mg != 1) {
    throw std::invalid_argument("SearchParams: MCS requires mg = 1");
  }
}

SearchParams SearchParams::bfs(std::size_t k, std::size_t l) {
  SearchParams p;
  p.k = k;
  p.l = l;
  return p;
}

SearchParams SearchParams::mcs(std::size_t k, std::size_t l, std::uint32_t mc) {
  SearchParams p = bfs(k, l);
  p.algorithm = Algorithm::MCS;
  p.mc = mc;
  return p;
}

SearchParams SearchParams::dst(std::size_t k, std::size_t l, std::uint32_t mg, std::uint32_t mc) {
  SearchParams p = bfs(k, l);
  p.algorithm = Algorithm::DST;
  p.mg = mg;
  p.mc = mc;
  return p;
}

namespace {

void check_inputs(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                  Algorithm expected) {
  if (params.algorithm != expected) {
    throw std::invalid_argument("search: params.algorithm is " + std::string(to_string(params.algorithm)) +
                                ", expected " + std::string(to_string(expected)));
  }
  params.validate();
  if (index.size() == 0) throw std::invalid_argument("search: empty graph");
  if (query.size() != index.dim()) {
    throw std::invalid_argument("search: query dimension " + std::to_string(query.size()) +
                                " does not match index dimension " + std::to_string(index.dim()));
  }
  if (params.k > index.size()) {
    throw std::invalid_argument("search: k=" + std::to_string(params.k) + " exceeds node count " +
                                std::to_string(index.size()));
  }
}

// Mutable per-query state owned by one coordinator.
class QueryState {
 public:
  QueryState(const GraphIndex& index, std::span<const float> query, const SearchParams& params)
      : index_(index),
        query_(query),
        params_(params),
        candidates_(params.l),
        results_(params.l),
        tracker_(params.tracker, index.size()) {
    const NodeId entry = index.entry_node();
    const float d = dist(entry);
    tracker_.insert(entry);
    ++stats_.visited;
    candidates_.insert(entry, d);
    results_.insert(entry, d);
  }

  float dist(NodeId v) const noexcept {
    return distance_unchecked(index_.metric(), query_.data(), index_.vector(v), index_.dim());
  }

  float threshold() const noexcept { return results_.max_distance(params_.l); }
  BoundedQueue& candidates() noexcept { return candidates_; }

  /// Visited check + mark for every neighbor of `candidate`; returns the new ones.
  std::vector<NodeId> claim_neighbors(NodeId candidate) {
    std::vector<NodeId> fresh;
    for (NodeId n : index_.neighbors(candidate)) {
      if (tracker_.check(n)) continue;
      tracker_.insert(n);
      ++stats_.visited;
      fresh.push_back(n);
    }
    return fresh;
  }

  void record(const Neighbor& candidate, std::span<const Neighbor> evaluated) {
    if (params_.trace) {
      stats_.trace.push_back({stats_.hops, candidate.id, candidate.distance,
                              std::vector<Neighbor>(evaluated.begin(), evaluated.end())});
    }
    ++stats_.hops;
    for (const auto& n : evaluated) {
      ++stats_.dist_computations;
      candidates_.insert(n.id, n.distance);
      results_.insert(n.id, n.distance);
    }
  }

  void apply(const GroupOutcome& outcome) {
    for (std::size_t i = 0; i < outcome.candidates.size(); ++i) {
      record(outcome.candidates[i], outcome.evaluated[i]);
    }
  }

  GroupTask make_task(std::uint64_t seq, std::vector<Neighbor> group) {
    GroupTask task;
    task.seq = seq;
    task.pending.reserve(group.size());
    for (const auto& c : group) task.pending.push_back(claim_neighbors(c.id));
    task.candidates = std::move(group);
    return task;
  }

  SearchResult finish() {
    stats_.bloom_false_positives = tracker_.false_positives();
    SearchResult out;
    out.neighbors = results_.sorted_top_k(std::min(params_.k, results_.size()));
    out.stats = std::move(stats_);
    return out;
  }

 private:
  const GraphIndex& index_;
  std::span<const float> query_;
  const SearchParams& params_;
  BoundedQueue candidates_;
  BoundedQueue results_;
  VisitedTracker tracker_;
  SearchStats stats_;
};

}  // namespace

GroupOutcome evaluate_group(const GraphIndex& index, std::span<const float> query, const GroupTask& task) {
  GroupOutcome out;
  out.seq = task.seq;
  out.candidates = task.candidates;
  out.evaluated.resize(task.pending.size());
  for (std::size_t i = 0; i < task.pending.size(); ++i) {
    auto& row = out.evaluated[i];
    row.reserve(task.pending[i].size());
    for (NodeId n : task.pending[i]) {
      row.push_back({n, distance_unchecked(index.metric(), query.data(), index.vector(n), index.dim())});
    }
  }
  return out;
}

void SequentialEvaluator::launch(const GraphIndex& index, std::span<const float> query, GroupTask task) {
  queue_.push_back({&index, query, std::move(task)});
}

GroupOutcome SequentialEvaluator::next_completion(CompletionPolicy) {
  if (queue_.empty()) throw std::logic_error("SequentialEvaluator: no group in flight");
  Pending p = std::move(queue_.front());
  queue_.pop_front();
  return evaluate_group(*p.index, p.query, p.task);
}

SearchResult bfs_search(const GraphIndex& index, std::span<const float> query, const SearchParams& params) {
  check_inputs(index, query, params, Algorithm::BFS);
  QueryState state(index, query, params);
  auto& candidates = state.candidates();
  std::vector<Neighbor> evaluated;
  while (!candidates.empty() && candidates.min_distance() <= state.threshold()) {
    const Neighbor c = candidates.extract_min();
    evaluated.clear();
    for (NodeId n : state.claim_neighbors(c.id)) evaluated.push_back({n, state.dist(n)});
    state.record(c, evaluated);
  }
  return state.finish();
}

SearchResult mcs_search(const GraphIndex& index, std::span<const float> query, const SearchParams& params) {
  check_inputs(index, query, params, Algorithm::MCS);
  QueryState state(index, query, params);
  std::uint64_t seq = 0;
  while (true) {
    auto group = state.candidates().extract_min_threshold(params.mc, state.threshold());
    if (group.empty()) break;
    // Whole group evaluated before any queue update: the per-iteration barrier.
    const GroupTask task = state.make_task(seq++, std::move(group));
    state.apply(evaluate_group(index, query, task));
  }
  return state.finish();
}

SearchResult dst_search(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                        GroupEvaluator& evaluator) {
  check_inputs(index, query, params, Algorithm::DST);
  QueryState state(index, query, params);
  std::uint64_t seq = 0;

  // The entry node is the first group.
  auto first = state.candidates().extract_min_threshold(params.mc, state.threshold());
  evaluator.launch(index, query, state.make_task(seq++, std::move(first)));
  std::uint32_t in_flight = 1;

  while (in_flight > 0) {
    const GroupOutcome done = evaluator.next_completion(params.completion);
    --in_flight;
    state.apply(done);
    while (in_flight < params.mg) {
      auto group = state.candidates().extract_min_threshold(params.mc, state.threshold());
      if (group.empty()) break;
      evaluator.launch(index, query, state.make_task(seq++, std::move(group)));
      ++in_flight;
    }
  }
  return state.finish();
}

SearchResult dst_search(const GraphIndex& index, std::span<const float> query, const SearchParams& params) {
  SequentialEvaluator evaluator;
  return dst_search(index, query, params, evaluator);
}

SearchResult search(const GraphIndex& index, std::span<const float> query, const SearchParams& params) {
  switch (params.algorithm) {
    case Algorithm::BFS:
      return bfs_search(index, query, params);
    case Algorithm::MCS:
      return mcs_search(index, query, params);
    case Algorithm::DST:
      return dst_search(index, query, params);
  }
  throw std::invalid_argument("search: unknown algorithm");
}

double recall_at_k(std::span<const Neighbor> results, std::span<const NodeId> ground_truth_row, std::size_t k) {
  if (k == 0) throw std::invalid_argument("recall_at_k: k must be >= 1");
  if (ground_truth_row.size() < k) {
    throw std::invalid_argument("recall_at_k: ground truth has " + std::to_string(ground_truth_row.size()) +
                                " ids, need " + std::to_string(k));
  }
  const std::unordered_set<NodeId> truth(ground_truth_row.begin(),
                                         ground_truth_row.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t hits = 0;
  const std::size_t n = std::min(k, results.size());
  for (std::size_t i = 0; i < n; ++i) hits += truth.contains(results[i].id) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace falcon
