#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "falcon/dataset.hpp"
#include "falcon/graph_index.hpp"
#include "falcon/traversal.hpp"

namespace falcon::sim {

/// Timing parameters of the modeled accelerator. Cycle counts are at clock_mhz.
struct HwConfig {
  double clock_mhz = 200.0;
  std::uint32_t channels = 4;
  /// Bloom-fetch-compute units; neighbor n is served by unit (n % channels) % bfc_units.
  std::uint32_t bfc_units = 4;
  std::uint32_t qpps = 1;
  /// Random-access latency of one memory request.
  std::uint32_t mem_latency_cycles = 60;
  /// Streaming width per channel and per fetch port.
  std::uint32_t mem_bytes_per_cycle = 64;
  /// In-flight request cap per fetch port.
  std::uint32_t max_outstanding = 64;
  std::uint32_t queue_insert_cycles_per_elem = 2;
  std::uint32_t queue_pop_cycles = 1;
  std::uint32_t bloom_check_cycles_per_elem = 1;
  std::uint32_t dist_pipeline_depth = 8;
  std::uint32_t dist_elems_per_cycle = 16;
  std::uint32_t edge_header_bytes = 4;

  /// A systolic queue of s registers is sorted in s - 1 cycles.
  static std::uint64_t queue_sort_cycles(std::size_t s) noexcept { return s > 0 ? s - 1 : 0; }

  void validate() const;

  /// One pipeline with a single BFC unit and a narrow distance unit, so vector
  /// fetch and distance compute are the bottleneck steps of each candidate.
  static HwConfig illustrative();
};

enum class Stage : std::size_t { S1 = 0, S2, S3, S4, S5, S6 };
inline constexpr std::size_t kStageCount = 6;
std::string_view stage_name(Stage stage) noexcept;

struct Interval {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
};

struct SimReport {
  std::uint64_t total_cycles = 0;
  /// Cycles during which at least one sub-step of the stage was active.
  std::array<std::uint64_t, kStageCount> busy{};
  std::array<double, kStageCount> utilization{};
  /// Union of S3 and S4 activity over total_cycles.
  double fetch_compute_utilization = 0.0;
  /// (cycle, cumulative completed candidates) at every synchronization point.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> completed_candidates_timeline;
  /// Group seqs in the order the coordinator consumed them.
  std::vector<std::uint64_t> completion_order;
  /// Data-bus occupancy per memory channel, in issue order.
  std::vector<std::vector<Interval>> channel_busy;
  std::size_t visited = 0;
  std::size_t hops = 0;
  SearchResult result;

  std::uint64_t completed_by(std::uint64_t cycle) const noexcept;
  double latency_us(const HwConfig& hw) const noexcept { return static_cast<double>(total_cycles) / hw.clock_mhz; }
};

/// Runs the functional traversal (BFS/MCS/DST per params.algorithm) and times every
/// sub-step with a discrete-event model of one query pipeline:
///   S1 pop + edge-list fetch, S2 Bloom check, S3 vector fetch, S4 distance,
///   S5 queue insertion, S6 queue sort.
/// A group completes when its last insertion lands; the coordinator then sorts
/// (S6) before any further extraction.
SimReport simulate_query(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                         const HwConfig& hw);

struct SweepCell {
  std::uint32_t mg = 1;
  std::uint32_t mc = 1;
  double mean_cycles = 0.0;
  double speedup = 1.0;
  double mean_hops = 0.0;
  double mean_visited = 0.0;
  double mean_recall = 0.0;
  double fetch_compute_utilization = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  double baseline_cycles = 0.0;

  const SweepCell& best() const;
  const SweepCell& at(std::uint32_t mg, std::uint32_t mc) const;
};

/// Simulates every (mg, mc) cell over `queries`; speedup is mean BFS cycles over
/// mean cell cycles. (1, 1) is BFS and (1, mc) is MCS.
SweepResult sweep_mg_mc(const GraphIndex& index, const VectorSet& queries, const GroundTruth& ground_truth,
                        const SearchParams& params_base, const HwConfig& hw,
                        std::span<const std::uint32_t> mg_range, std::span<const std::uint32_t> mc_range,
                        std::size_t threads = 0);

/// Columns: mg,mc,speedup,hops,recall,cycles,visited.
void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);

struct ScalingPoint {
  std::uint32_t units = 1;
  Algorithm algorithm = Algorithm::BFS;
  double latency_cycles = 0.0;
  /// Relative to the same algorithm on the first entry of bfc_counts.
  double speedup = 1.0;
};

/// Mean simulated latency per BFC-unit count for BFS and for `dst_params`.
std::vector<ScalingPoint> simulate_intra_scaling(const GraphIndex& index, const VectorSet& queries,
                                                 const SearchParams& dst_params, const HwConfig& hw,
                                                 std::span<const std::uint32_t> bfc_counts);

/// Columns: units,algo,latency_cycles,speedup.
void write_scaling_csv(std::span<const ScalingPoint> points, const std::filesystem::path& path);

}  // namespace falcon::sim
