#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <future>
#include <memory>
#include <mutex>
#include <span>
#include <string_view>
#include <vector>

#include "falcon/graph_index.hpp"
#include "falcon/traversal.hpp"
#include "falcon/worker_pool.hpp"

namespace falcon {

enum class ExecMode { AcrossQuery, IntraQuery, Partitioned };

std::string_view to_string(ExecMode mode) noexcept;
ExecMode parse_exec_mode(std::string_view name);

struct EngineConfig {
  ExecMode mode = ExecMode::AcrossQuery;
  /// Evaluation workers, one per modeled BFC unit / memory channel.
  std::size_t units = 4;
  /// Concurrent query coordinators, one per modeled query pipeline.
  std::size_t pipelines = 1;

  void validate() const;
};

/// Runs each candidate group as one task on a worker pool.
class PoolEvaluator final : public GroupEvaluator {
 public:
  explicit PoolEvaluator(WorkerPool& pool);
  ~PoolEvaluator() override;

  void launch(const GraphIndex& index, std::span<const float> query, GroupTask task) override;
  GroupOutcome next_completion(CompletionPolicy policy) override;

 private:
  struct Shared;
  WorkerPool& pool_;
  std::shared_ptr<Shared> shared_;
};

/// Independent queries spread over `pipelines` coordinators; results in input order.
std::vector<SearchResult> search_batch_across(const GraphIndex& index, const VectorSet& queries,
                                              const SearchParams& params, const EngineConfig& config);

/// One query, groups dispatched over `units` workers. BFS and MCS parameters run as
/// their single-group DST equivalents.
SearchResult search_intra(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                          const EngineConfig& config);
SearchResult search_intra(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                          WorkerPool& units);

/// Searches every part with the same params, maps ids to global, merges top-k.
/// Stats are summed over parts.
SearchResult search_partitioned(const SubgraphSet& subgraphs, std::span<const float> query,
                                const SearchParams& params);

struct PartitionPoint {
  std::uint32_t parts = 1;
  /// Smallest per-part l whose mean recall reaches the target (l_max if none does).
  std::size_t l = 0;
  bool reached = false;
  double mean_recall = 0.0;
  /// Mean over queries of the visited count summed over parts.
  double mean_visited = 0.0;
  /// mean_visited relative to the first entry of the parts list.
  double visited_ratio = 1.0;
};

/// For each part count, splits `base`, then scans l upward from k until BFS over
/// the parts reaches `target_recall` mean R@k, and records the visited cost there.
std::vector<PartitionPoint> partition_overhead(const VectorSet& base, const VectorSet& queries,
                                               const GroundTruth& ground_truth,
                                               std::span<const std::uint32_t> parts_list, std::uint32_t max_degree,
                                               std::uint32_t ef_construction, std::uint64_t seed,
                                               double target_recall, std::size_t k, std::size_t l_max);

/// Columns: parts,l,recall,visited,ratio.
void write_partition_csv(std::span<const PartitionPoint> points, const std::filesystem::path& path);

/// Long-lived engine shared by all connections of the search service.
class SearchEngine {
 public:
  SearchEngine(std::shared_ptr<const GraphIndex> index, EngineConfig config);

  const GraphIndex& index() const noexcept { return *index_; }
  const EngineConfig& config() const noexcept { return config_; }

  /// Thread-safe synchronous search in the configured mode.
  SearchResult search(std::span<const float> query, const SearchParams& params);

  /// Queues the query on the across-query pipelines.
  std::future<SearchResult> submit(std::vector<float> query, SearchParams params);

 private:
  std::shared_ptr<const GraphIndex> index_;
  EngineConfig config_;
  std::unique_ptr<WorkerPool> pipelines_;
  std::unique_ptr<WorkerPool> units_;
  std::mutex intra_mu_;
};

}  // namespace falcon
