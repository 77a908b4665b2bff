#include "falcon/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace falcon {

std::string_view to_string(ExecMode mode) noexcept {
  switch (mode) {
    case ExecMode::AcrossQuery:
      return "across";
    case ExecMode::IntraQuery:
      return "intra";
    case ExecMode::Partitioned:
      return "partitioned";
  }
  return "unknown";
}

ExecMode parse_exec_mode(std::string_view name) {
  if (name == "across" || name == "across_query") return ExecMode::AcrossQuery;
  if (name == "intra" || name == "intra_query") return ExecMode::IntraQuery;
  if (name == "partitioned") return ExecMode::Partitioned;
  throw std::invalid_argument("unknown execution mode: " + std::string(name));
}

void EngineConfig::validate() const {
  if (units == 0) throw std::invalid_argument("EngineConfig: units must be >= 1");
  if (pipelines == 0) throw std::invalid_argument("EngineConfig: pipelines must be >= 1");
}

struct PoolEvaluator::Shared {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint64_t> launched;   // in-flight seqs, launch order
  std::map<std::uint64_t, GroupOutcome> done;
  std::deque<std::uint64_t> arrivals;   // completion order
  std::size_t running = 0;
};

PoolEvaluator::PoolEvaluator(WorkerPool& pool) : pool_(pool), shared_(std::make_shared<Shared>()) {}

PoolEvaluator::~PoolEvaluator() {
  std::unique_lock lock(shared_->mu);
  shared_->cv.wait(lock, [this] { return shared_->running == 0; });
}

void PoolEvaluator::launch(const GraphIndex& index, std::span<const float> query, GroupTask task) {
  {
    std::lock_guard lock(shared_->mu);
    shared_->launched.push_back(task.seq);
    ++shared_->running;
  }
  pool_.post([shared = shared_, &index, query, task = std::move(task)] {
    GroupOutcome outcome = evaluate_group(index, query, task);
    {
      std::lock_guard lock(shared->mu);
      shared->arrivals.push_back(outcome.seq);
      shared->done.emplace(outcome.seq, std::move(outcome));
      --shared->running;
    }
    shared->cv.notify_all();
  });
}

GroupOutcome PoolEvaluator::next_completion(CompletionPolicy policy) {
  std::unique_lock lock(shared_->mu);
  if (shared_->launched.empty()) throw std::logic_error("PoolEvaluator: no group in flight");
  std::uint64_t seq = 0;
  if (policy == CompletionPolicy::FifoDeterministic) {
    seq = shared_->launched.front();
    shared_->cv.wait(lock, [&] { return shared_->done.contains(seq); });
  } else {
    shared_->cv.wait(lock, [&] { return !shared_->arrivals.empty(); });
    seq = shared_->arrivals.front();
  }
  std::erase(shared_->launched, seq);
  std::erase(shared_->arrivals, seq);
  auto node = shared_->done.extract(seq);
  return std::move(node.mapped());
}

std::vector<SearchResult> search_batch_across(const GraphIndex& index, const VectorSet& queries,
                                              const SearchParams& params, const EngineConfig& config) {
  config.validate();
  if (config.mode != ExecMode::AcrossQuery) {
    throw std::invalid_argument("search_batch_across: config.mode must be across_query");
  }
  params.validate();
  std::vector<SearchResult> results(queries.count);
  if (queries.count == 0) return results;
  if (queries.dim != index.dim()) throw std::invalid_argument("search_batch_across: query dimension mismatch");

  std::atomic<std::size_t> next{0};
  auto coordinator = [&] {
    for (std::size_t q = next.fetch_add(1); q < queries.count; q = next.fetch_add(1)) {
      results[q] = search(index, queries.row(q), params);
    }
  };
  const std::size_t threads = std::min(config.pipelines, queries.count);
  if (threads == 1) {
    coordinator();
    return results;
  }
  std::vector<std::future<void>> workers;
  std::exception_ptr error;
  for (std::size_t t = 0; t < threads; ++t) workers.push_back(std::async(std::launch::async, coordinator));
  for (auto& w : workers) {
    try {
      w.get();
    } catch (...) {
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return results;
}

namespace {

SearchParams as_dst(SearchParams params) {
  params.algorithm = Algorithm::DST;
  return params;
}

}  // namespace

SearchResult search_intra(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                          WorkerPool& units) {
  params.validate();
  PoolEvaluator evaluator(units);
  return dst_search(index, query, as_dst(params), evaluator);
}

SearchResult search_intra(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                          const EngineConfig& config) {
  config.validate();
  if (config.mode != ExecMode::IntraQuery) {
    throw std::invalid_argument("search_intra: config.mode must be intra_query");
  }
  WorkerPool units(config.units);
  return search_intra(index, query, params, units);
}

SearchResult search_partitioned(const SubgraphSet& subgraphs, std::span<const float> query,
                                const SearchParams& params) {
  if (subgraphs.parts.empty()) throw std::invalid_argument("search_partitioned: no parts");
  if (params.k > subgraphs.total_nodes()) {
    throw std::invalid_argument("search_partitioned: k=" + std::to_string(params.k) + " exceeds node count " +
                                std::to_string(subgraphs.total_nodes()));
  }
  SearchResult merged;
  std::vector<Neighbor> pool;
  for (std::size_t p = 0; p < subgraphs.parts.size(); ++p) {
    const GraphIndex& part = subgraphs.parts[p];
    SearchParams local = params;
    local.k = std::min(params.k, part.size());
    const SearchResult r = search(part, query, local);
    for (const auto& n : r.neighbors) pool.push_back({subgraphs.global_ids[p][n.id], n.distance});
    merged.stats.hops += r.stats.hops;
    merged.stats.visited += r.stats.visited;
    merged.stats.dist_computations += r.stats.dist_computations;
    merged.stats.bloom_false_positives += r.stats.bloom_false_positives;
  }
  std::sort(pool.begin(), pool.end(), CloserFirst{});
  pool.resize(std::min(pool.size(), params.k));
  merged.neighbors = std::move(pool);
  return merged;
}

std::vector<PartitionPoint> partition_overhead(const VectorSet& base, const VectorSet& queries,
                                               const GroundTruth& ground_truth,
                                               std::span<const std::uint32_t> parts_list, std::uint32_t max_degree,
                                               std::uint32_t ef_construction, std::uint64_t seed,
                                               double target_recall, std::size_t k, std::size_t l_max) {
  if (parts_list.empty()) throw std::invalid_argument("partition_overhead: empty parts list");
  if (queries.count == 0) throw std::invalid_argument("partition_overhead: no queries");
  if (ground_truth.num_queries < queries.count || ground_truth.k_gt < k) {
    throw std::invalid_argument("partition_overhead: ground truth does not cover the queries at k");
  }
  if (l_max < k) throw std::invalid_argument("partition_overhead: l_max < k");

  std::vector<PartitionPoint> points;
  for (std::uint32_t parts : parts_list) {
    const SubgraphSet subgraphs = split_subgraphs(base, parts, max_degree, ef_construction, seed);
    PartitionPoint pt;
    pt.parts = parts;
    for (std::size_t l = k; l <= l_max; ++l) {
      double recall = 0.0, visited = 0.0;
      for (std::size_t q = 0; q < queries.count; ++q) {
        const SearchResult r = search_partitioned(subgraphs, queries.row(q), SearchParams::bfs(k, l));
        recall += recall_at_k(r.neighbors, ground_truth.row(q), k);
        visited += static_cast<double>(r.stats.visited);
      }
      pt.l = l;
      pt.mean_recall = recall / static_cast<double>(queries.count);
      pt.mean_visited = visited / static_cast<double>(queries.count);
      if (pt.mean_recall >= target_recall) {
        pt.reached = true;
        break;
      }
    }
    points.push_back(pt);
  }
  for (auto& pt : points) pt.visited_ratio = pt.mean_visited / points.front().mean_visited;
  return points;
}

void write_partition_csv(std::span<const PartitionPoint> points, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_partition_csv: cannot open " + path.string());
  out << "parts,l,recall,visited,ratio\n";
  for (const auto& p : points) {
    out << p.parts << ',' << p.l << ',' << p.mean_recall << ',' << p.mean_visited << ',' << p.visited_ratio << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write_partition_csv: write failed on " + path.string());
}

SearchEngine::SearchEngine(std::shared_ptr<const GraphIndex> index, EngineConfig config)
    : index_(std::move(index)), config_(config) {
  config_.validate();
  if (!index_) throw std::invalid_argument("SearchEngine: null index");
  if (config_.mode == ExecMode::Partitioned) {
    throw std::invalid_argument("SearchEngine: partitioned mode needs a SubgraphSet, use search_partitioned");
  }
  pipelines_ = std::make_unique<WorkerPool>(config_.pipelines);
  if (config_.mode == ExecMode::IntraQuery) units_ = std::make_unique<WorkerPool>(config_.units);
}

SearchResult SearchEngine::search(std::span<const float> query, const SearchParams& params) {
  if (config_.mode == ExecMode::IntraQuery) {
    // One query owns all units at a time.
    std::lock_guard lock(intra_mu_);
    return search_intra(*index_, query, params, *units_);
  }
  return falcon::search(*index_, query, params);
}

std::future<SearchResult> SearchEngine::submit(std::vector<float> query, SearchParams params) {
  return pipelines_->submit(
      [this, query = std::move(query), params = std::move(params)] { return search(query, params); });
}

}  // namespace falcon
