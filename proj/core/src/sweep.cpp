#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "falcon/sim.hpp"
#include "falcon/worker_pool.hpp"

namespace falcon::sim {

const SweepCell& SweepResult::best() const {
  if (cells.empty()) throw std::logic_error("SweepResult::best on empty sweep");
  return *std::max_element(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) {
    return a.speedup < b.speedup;
  });
}

const SweepCell& SweepResult::at(std::uint32_t mg, std::uint32_t mc) const {
  for (const auto& c : cells) {
    if (c.mg == mg && c.mc == mc) return c;
  }
  throw std::out_of_range("SweepResult::at: no cell (" + std::to_string(mg) + ", " + std::to_string(mc) + ")");
}

namespace {

SearchParams cell_params(const SearchParams& base, std::uint32_t mg, std::uint32_t mc) {
  if (mg == 1 && mc == 1) return SearchParams{base.k, base.l, 1, 1, Algorithm::BFS, base.tracker, base.completion, false};
  if (mg == 1) return SearchParams{base.k, base.l, mc, 1, Algorithm::MCS, base.tracker, base.completion, false};
  return SearchParams{base.k, base.l, mc, mg, Algorithm::DST, base.tracker, base.completion, false};
}

SweepCell run_cell(const GraphIndex& index, const VectorSet& queries, const GroundTruth& gt,
                   const SearchParams& base, const HwConfig& hw, std::uint32_t mg, std::uint32_t mc) {
  const SearchParams params = cell_params(base, mg, mc);
  SweepCell cell;
  cell.mg = mg;
  cell.mc = mc;
  for (std::size_t q = 0; q < queries.count; ++q) {
    const SimReport r = simulate_query(index, queries.row(q), params, hw);
    cell.mean_cycles += static_cast<double>(r.total_cycles);
    cell.mean_hops += static_cast<double>(r.hops);
    cell.mean_visited += static_cast<double>(r.visited);
    cell.fetch_compute_utilization += r.fetch_compute_utilization;
    cell.mean_recall += recall_at_k(r.result.neighbors, gt.row(q), params.k);
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, queries.count));
  cell.mean_cycles /= n;
  cell.mean_hops /= n;
  cell.mean_visited /= n;
  cell.fetch_compute_utilization /= n;
  cell.mean_recall /= n;
  return cell;
}

}  // namespace

SweepResult sweep_mg_mc(const GraphIndex& index, const VectorSet& queries, const GroundTruth& ground_truth,
                        const SearchParams& params_base, const HwConfig& hw,
                        std::span<const std::uint32_t> mg_range, std::span<const std::uint32_t> mc_range,
                        std::size_t threads) {
  if (mg_range.empty() || mc_range.empty()) throw std::invalid_argument("sweep_mg_mc: empty parameter range");
  if (ground_truth.num_queries < queries.count || ground_truth.k_gt < params_base.k) {
    throw std::invalid_argument("sweep_mg_mc: ground truth does not cover the queries at k");
  }
  for (auto v : mg_range) if (v == 0) throw std::invalid_argument("sweep_mg_mc: mg must be >= 1");
  for (auto v : mc_range) if (v == 0) throw std::invalid_argument("sweep_mg_mc: mc must be >= 1");

  std::vector<std::pair<std::uint32_t, std::uint32_t>> grid;
  for (auto mg : mg_range) {
    for (auto mc : mc_range) grid.emplace_back(mg, mc);
  }
  const bool has_baseline =
      std::find(grid.begin(), grid.end(), std::pair<std::uint32_t, std::uint32_t>{1, 1}) != grid.end();
  if (!has_baseline) grid.emplace_back(1, 1);

  std::vector<SweepCell> cells(grid.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, grid.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      cells[i] = run_cell(index, queries, ground_truth, params_base, hw, grid[i].first, grid[i].second);
    }
  } else {
    WorkerPool pool(threads);
    std::vector<std::future<SweepCell>> futures;
    for (const auto& [mg, mc] : grid) {
      futures.push_back(pool.submit([&, mg = mg, mc = mc] {
        return run_cell(index, queries, ground_truth, params_base, hw, mg, mc);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) cells[i] = futures[i].get();
  }

  SweepResult out;
  for (const auto& c : cells) {
    if (c.mg == 1 && c.mc == 1) out.baseline_cycles = c.mean_cycles;
  }
  for (auto& c : cells) c.speedup = c.mean_cycles > 0.0 ? out.baseline_cycles / c.mean_cycles : 1.0;
  if (!has_baseline) cells.pop_back();
  out.cells = std::move(cells);
  return out;
}

void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path.string());
  out << "mg,mc,speedup,hops,recall,cycles,visited\n";
  char line[256];
  for (const auto& c : sweep.cells) {
    std::snprintf(line, sizeof line, "%u,%u,%.6f,%.3f,%.6f,%.1f,%.3f\n", c.mg, c.mc, c.speedup, c.mean_hops,
                  c.mean_recall, c.mean_cycles, c.mean_visited);
    out << line;
  }
  if (!out) throw std::runtime_error("write_sweep_csv: write failed on " + path.string());
}

std::vector<ScalingPoint> simulate_intra_scaling(const GraphIndex& index, const VectorSet& queries,
                                                 const SearchParams& dst_params, const HwConfig& hw,
                                                 std::span<const std::uint32_t> bfc_counts) {
  if (bfc_counts.empty()) throw std::invalid_argument("simulate_intra_scaling: bfc_counts is empty");
  if (queries.count == 0) throw std::invalid_argument("simulate_intra_scaling: no queries");
  std::vector<ScalingPoint> out;
  const SearchParams bfs = SearchParams::bfs(dst_params.k, dst_params.l);
  for (const SearchParams* params : {&bfs, &dst_params}) {
    double reference = 0.0;
    for (std::size_t i = 0; i < bfc_counts.size(); ++i) {
      HwConfig scaled = hw;
      scaled.bfc_units = bfc_counts[i];
      double total = 0.0;
      for (std::size_t q = 0; q < queries.count; ++q) {
        total += static_cast<double>(simulate_query(index, queries.row(q), *params, scaled).total_cycles);
      }
      const double mean = total / static_cast<double>(queries.count);
      if (i == 0) reference = mean;
      out.push_back({bfc_counts[i], params->algorithm, mean, reference / mean});
    }
  }
  return out;
}

void write_scaling_csv(std::span<const ScalingPoint> points, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_scaling_csv: cannot open " + path.string());
  out << "units,algo,latency_cycles,speedup\n";
  char line[128];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%u,%s,%.1f,%.6f\n", p.units, std::string(to_string(p.algorithm)).c_str(),
                  p.latency_cycles, p.speedup);
    out << line;
  }
  if (!out) throw std::runtime_error("write_scaling_csv: write failed on " + path.string());
}

}  // namespace falcon::sim
