#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "falcon/graph_index.hpp"
#include "falcon/types.hpp"
#include "falcon/visited.hpp"

namespace falcon {

enum class Algorithm { BFS, MCS, DST };

/// How the DST coordinator picks the next finished group.
///  - FifoDeterministic: always the earliest-launched in-flight group.
///  - Concurrent: whichever group the evaluator finishes first.
enum class CompletionPolicy { FifoDeterministic, Concurrent };

std::string_view to_string(Algorithm algorithm) noexcept;
Algorithm parse_algorithm(std::string_view name);

struct SearchParams {
  std::size_t k = 10;
  /// Result-queue size; also the candidate-queue capacity.
  std::size_t l = 64;
  /// Candidates per group.
  std::uint32_t mc = 1;
  /// Groups in flight.
  std::uint32_t mg = 1;
  Algorithm algorithm = Algorithm::BFS;
  TrackerConfig tracker{};
  CompletionPolicy completion = CompletionPolicy::FifoDeterministic;
  bool trace = false;

  /// Throws std::invalid_argument if k > l, k == 0, mc/mg == 0, BFS with mc or mg != 1,
  /// or MCS with mg != 1.
  void validate() const;

  static SearchParams bfs(std::size_t k, std::size_t l);
  static SearchParams mcs(std::size_t k, std::size_t l, std::uint32_t mc);
  static SearchParams dst(std::size_t k, std::size_t l, std::uint32_t mg, std::uint32_t mc);
};

/// One evaluated candidate and the unvisited neighbors whose distances it produced.
struct TraceEval {
  std::size_t step = 0;
  NodeId candidate = kInvalidNode;
  float candidate_distance = 0.0f;
  std::vector<Neighbor> neighbors;

  friend bool operator==(const TraceEval&, const TraceEval&) = default;
};

struct SearchStats {
  /// Evaluated candidates, entry included.
  std::size_t hops = 0;
  /// Tracker insertions, entry included.
  std::size_t visited = 0;
  /// Neighbor distance evaluations (the entry's own distance is not counted).
  std::size_t dist_computations = 0;
  std::uint64_t bloom_false_positives = 0;
  std::vector<TraceEval> trace;

  friend bool operator==(const SearchStats&, const SearchStats&) = default;
};

struct SearchResult {
  std::vector<Neighbor> neighbors;
  SearchStats stats;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

/// A candidate group handed to an evaluator: the neighbors in `pending` have
/// already been marked visited by the coordinator.
struct GroupTask {
  std::uint64_t seq = 0;
  std::vector<Neighbor> candidates;
  std::vector<std::vector<NodeId>> pending;
};

struct GroupOutcome {
  std::uint64_t seq = 0;
  std::vector<Neighbor> candidates;
  std::vector<std::vector<Neighbor>> evaluated;
};

/// Fetch + distance stage of one group; the only work DST runs off-coordinator.
GroupOutcome evaluate_group(const GraphIndex& index, std::span<const float> query, const GroupTask& task);

/// Executes candidate groups for the DST coordinator.
class GroupEvaluator {
 public:
  virtual ~GroupEvaluator() = default;
  virtual void launch(const GraphIndex& index, std::span<const float> query, GroupTask task) = 0;
  /// Blocks until a launched group is done and returns it; see CompletionPolicy.
  virtual GroupOutcome next_completion(CompletionPolicy policy) = 0;
};

/// Evaluates in the caller's thread, in launch order.
class SequentialEvaluator final : public GroupEvaluator {
 public:
  void launch(const GraphIndex& index, std::span<const float> query, GroupTask task) override;
  GroupOutcome next_completion(CompletionPolicy policy) override;

 private:
  struct Pending {
    const GraphIndex* index;
    std::span<const float> query;
    GroupTask task;
  };
  std::deque<Pending> queue_;
};

/// Best-first search: one candidate per iteration.
SearchResult bfs_search(const GraphIndex& index, std::span<const float> query, const SearchParams& params);

/// Multi-candidate search: up to mc candidates per synchronized iteration.
SearchResult mcs_search(const GraphIndex& index, std::span<const float> query, const SearchParams& params);

/// Delayed-synchronization traversal: up to mg groups of mc candidates in flight;
/// queue state is only updated when a group completes.
SearchResult dst_search(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                        GroupEvaluator& evaluator);
SearchResult dst_search(const GraphIndex& index, std::span<const float> query, const SearchParams& params);

/// Dispatches on params.algorithm (DST uses a SequentialEvaluator).
SearchResult search(const GraphIndex& index, std::span<const float> query, const SearchParams& params);

/// |result ids ∩ first k ground-truth ids| / k. Throws if the row has fewer than k ids.
double recall_at_k(std::span<const Neighbor> results, std::span<const NodeId> ground_truth_row, std::size_t k);

/// Columns: eval_index,candidate_id,candidate_dist,neighbor_id,neighbor_dist,algorithm,mg,mc.
/// One row per evaluated candidate (neighbor columns empty) followed by one row per neighbor.
void emit_trace_csv(const SearchStats& stats, const SearchParams& params, const std::filesystem::path& path);
void emit_trace_csv(const SearchStats& stats, const SearchParams& params, std::ostream& out,
                    bool header = true);

}  // namespace falcon
