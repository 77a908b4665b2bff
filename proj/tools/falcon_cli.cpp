#include "falcon_cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <thread>

#include "falcon/dataset.hpp"
#include "falcon/graph_index.hpp"
#include "falcon/netsvc.hpp"
#include "falcon/parallel.hpp"
#include "falcon/sim.hpp"
#include "falcon/traversal.hpp"

namespace falcon::cli {

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

struct SearchOpts {
  std::string algo = "bfs";
  std::size_t k = 10;
  std::size_t l = 64;
  std::uint32_t mg = 1;
  std::uint32_t mc = 1;
  std::string tracker = "bloom";
  std::uint64_t bloom_bits = 1u << 18;
  unsigned bloom_hashes = 3;
  bool concurrent = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--algo", algo, "bfs | mcs | dst")->capture_default_str();
    cmd->add_option("-k", k, "neighbors to return")->capture_default_str();
    cmd->add_option("-l", l, "result queue size")->capture_default_str();
    cmd->add_option("--mg", mg, "candidate groups in flight (dst)")->capture_default_str();
    cmd->add_option("--mc", mc, "candidates per group (mcs, dst)")->capture_default_str();
    cmd->add_option("--tracker", tracker, "visited set: bloom | exact | bytes")->capture_default_str();
    cmd->add_option("--bloom-bits", bloom_bits, "Bloom filter size in bits")->capture_default_str();
    cmd->add_option("--bloom-hashes", bloom_hashes, "Bloom hash functions")->capture_default_str();
    cmd->add_flag("--concurrent", concurrent, "complete DST groups in finish order instead of launch order");
  }

  SearchParams params() const {
    SearchParams p;
    p.algorithm = parse_algorithm(algo);
    p.k = k;
    p.l = l;
    // BFS ignores mg/mc and MCS ignores mg, so a shared config file can carry both.
    p.mg = p.algorithm == Algorithm::DST ? mg : 1;
    p.mc = p.algorithm == Algorithm::BFS ? 1 : mc;
    p.tracker.kind = parse_tracker_kind(tracker);
    p.tracker.bloom_bits = bloom_bits;
    p.tracker.bloom_hashes = bloom_hashes;
    p.completion = concurrent ? CompletionPolicy::Concurrent : CompletionPolicy::FifoDeterministic;
    p.validate();
    return p;
  }
};

struct HwOpts {
  bool illustrative = false;
  std::uint32_t mem_latency = 0;
  std::uint32_t bfc_units = 0;
  std::uint32_t channels = 0;
  std::uint32_t dist_elems = 0;
  double clock_mhz = 0;

  void attach(CLI::App* cmd) {
    cmd->add_flag("--illustrative", illustrative, "start from the single-unit illustrative pipeline");
    cmd->add_option("--mem-latency", mem_latency, "memory latency in cycles");
    cmd->add_option("--bfc-units", bfc_units, "BFC units");
    cmd->add_option("--channels", channels, "memory channels");
    cmd->add_option("--dist-elems", dist_elems, "distance unit width, elements per cycle");
    cmd->add_option("--clock-mhz", clock_mhz, "accelerator clock");
  }

  sim::HwConfig config() const {
    sim::HwConfig hw = illustrative ? sim::HwConfig::illustrative() : sim::HwConfig{};
    if (mem_latency) hw.mem_latency_cycles = mem_latency;
    if (channels) hw.channels = channels;
    if (bfc_units) hw.bfc_units = bfc_units;
    if (dist_elems) hw.dist_elems_per_cycle = dist_elems;
    if (clock_mhz > 0) hw.clock_mhz = clock_mhz;
    hw.validate();
    return hw;
  }
};

std::vector<std::uint32_t> one_to(std::uint32_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 1u);
  return v;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

GroundTruth load_gt(const std::string& path, const VectorSet& queries, std::size_t k) {
  GroundTruth gt = read_ivecs(path);
  if (gt.num_queries < queries.count) {
    throw FormatError("ground truth has " + std::to_string(gt.num_queries) + " rows for " +
                      std::to_string(queries.count) + " queries");
  }
  if (gt.k_gt < k) throw FormatError("ground truth has " + std::to_string(gt.k_gt) + " ids per row, need " + std::to_string(k));
  return gt;
}

volatile std::sig_atomic_t g_stop = 0;
extern "C" void on_signal(int) { g_stop = 1; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"falcon: graph vector search toolkit with an accelerator timing model", "falcon"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file ([command] sections); command-line flags win");

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic fvecs dataset");
  std::size_t gen_count = 10000, gen_dim = 64;
  std::uint64_t gen_seed = 1;
  std::string gen_dist = "gaussian", gen_out;
  gen->add_option("-n,--count", gen_count, "vectors")->capture_default_str();
  gen->add_option("-d,--dim", gen_dim, "dimension")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--dist", gen_dist, "uniform01 | gaussian")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "output .fvecs")->required();

  // build
  auto* build = app.add_subcommand("build", "build a proximity graph and save it as FGVS");
  std::string build_data, build_out, build_metric = "l2";
  std::uint32_t build_degree = 64, build_ef = 128, build_channels = kDefaultChannels;
  std::uint64_t build_seed = 1;
  build->add_option("--data", build_data, "base vectors (.fvecs)")->required()->check(CLI::ExistingFile);
  build->add_option("-o,--out", build_out, "output index")->required();
  build->add_option("--max-degree", build_degree)->capture_default_str();
  build->add_option("--ef", build_ef, "construction queue size")->capture_default_str();
  build->add_option("--seed", build_seed)->capture_default_str();
  build->add_option("--metric", build_metric, "l2 | ip | cosine")->capture_default_str();
  build->add_option("--channels", build_channels, "modeled memory channels")->capture_default_str();

  // import
  auto* import = app.add_subcommand("import", "wrap an external adjacency file as FGVS");
  std::string import_data, import_adj, import_out, import_metric = "l2", import_entry = "medoid";
  import->add_option("--data", import_data, "base vectors (.fvecs)")->required()->check(CLI::ExistingFile);
  import->add_option("--adj", import_adj, "adjacency file")->required()->check(CLI::ExistingFile);
  import->add_option("-o,--out", import_out, "output index")->required();
  import->add_option("--metric", import_metric)->capture_default_str();
  import->add_option("--entry", import_entry, "first | medoid | node id")->capture_default_str();

  // gt
  auto* gt_cmd = app.add_subcommand("gt", "exact ground truth by brute force");
  std::string gt_base, gt_queries, gt_out;
  std::size_t gt_k = 100;
  gt_cmd->add_option("--base", gt_base)->required()->check(CLI::ExistingFile);
  gt_cmd->add_option("--queries", gt_queries)->required()->check(CLI::ExistingFile);
  gt_cmd->add_option("-k", gt_k)->capture_default_str();
  gt_cmd->add_option("-o,--out", gt_out, "output .ivecs")->required();

  // search
  auto* search_cmd = app.add_subcommand("search", "search every query and write the neighbors");
  std::string s_index, s_queries, s_gt, s_out;
  double s_min_recall = -1.0;
  SearchOpts s_opts;
  search_cmd->add_option("--index", s_index)->required()->check(CLI::ExistingFile);
  search_cmd->add_option("--queries", s_queries)->required()->check(CLI::ExistingFile);
  search_cmd->add_option("--gt", s_gt, "ground truth (.ivecs) for recall")->check(CLI::ExistingFile);
  search_cmd->add_option("-o,--out", s_out, "CSV: query,rank,id,distance");
  search_cmd->add_option("--min-recall", s_min_recall, "exit 1 if mean recall is below this");
  s_opts.attach(search_cmd);

  // bench
  auto* bench = app.add_subcommand("bench", "latency, throughput and recall");
  std::string b_index, b_queries, b_gt, b_csv, b_mode = "across";
  std::size_t b_units = 4, b_pipelines = 1, b_reps = 3;
  std::uint32_t b_parts = 4, b_part_degree = 32, b_part_ef = 64;
  double b_min_recall = -1.0;
  SearchOpts b_opts;
  bench->add_option("--index", b_index)->required()->check(CLI::ExistingFile);
  bench->add_option("--queries", b_queries)->required()->check(CLI::ExistingFile);
  bench->add_option("--gt", b_gt)->required()->check(CLI::ExistingFile);
  bench->add_option("--mode", b_mode, "across | intra | partitioned")->capture_default_str();
  bench->add_option("--units", b_units, "evaluation workers (intra)")->capture_default_str();
  bench->add_option("--pipelines", b_pipelines, "query coordinators (across)")->capture_default_str();
  bench->add_option("--repetitions", b_reps)->capture_default_str();
  bench->add_option("--parts", b_parts, "subgraphs (partitioned)")->capture_default_str();
  bench->add_option("--part-degree", b_part_degree, "subgraph max degree (partitioned)")->capture_default_str();
  bench->add_option("--part-ef", b_part_ef, "subgraph construction ef (partitioned)")->capture_default_str();
  bench->add_option("--csv", b_csv,
                    "CSV: algo,mode,k,l,mg,mc,units,pipelines,queries,repetitions,mean_us,median_us,p95_us,qps,recall,"
                    "hops,visited");
  bench->add_option("--min-recall", b_min_recall, "exit 1 if mean recall is below this");
  b_opts.attach(bench);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "simulated (mg, mc) grid");
  std::string w_index, w_queries, w_gt, w_csv;
  std::uint32_t w_mg_max = 4, w_mc_max = 8;
  std::size_t w_k = 10, w_l = 64, w_threads = 0;
  HwOpts w_hw;
  sweep->add_option("--index", w_index)->required()->check(CLI::ExistingFile);
  sweep->add_option("--queries", w_queries)->required()->check(CLI::ExistingFile);
  sweep->add_option("--gt", w_gt)->required()->check(CLI::ExistingFile);
  sweep->add_option("--mg-max", w_mg_max)->capture_default_str();
  sweep->add_option("--mc-max", w_mc_max)->capture_default_str();
  sweep->add_option("-k", w_k)->capture_default_str();
  sweep->add_option("-l", w_l)->capture_default_str();
  sweep->add_option("--threads", w_threads, "0 = hardware concurrency")->capture_default_str();
  sweep->add_option("--csv", w_csv, "CSV: mg,mc,speedup,hops,recall,cycles,visited");
  w_hw.attach(sweep);

  // figdata
  auto* fig = app.add_subcommand("figdata", "plot-ready CSV for the subgraph, trace and scaling experiments");
  fig->require_subcommand(1);

  auto* fig2 = fig->add_subcommand("fig2_subgraphs", "visited cost of partitioned search at matched recall");
  std::string f2_data, f2_queries, f2_out;
  std::size_t f2_count = 20000, f2_dim = 32, f2_nq = 100, f2_k = 10, f2_lmax = 512;
  std::uint32_t f2_degree = 32, f2_ef = 64;
  std::uint64_t f2_seed = 1;
  double f2_target = 0.9;
  std::vector<std::uint32_t> f2_parts{1, 2, 4, 8};
  fig2->add_option("--data", f2_data, "base vectors; synthetic if omitted")->check(CLI::ExistingFile);
  fig2->add_option("--queries", f2_queries, "queries; synthetic if omitted")->check(CLI::ExistingFile);
  fig2->add_option("--count", f2_count, "synthetic base size")->capture_default_str();
  fig2->add_option("--dim", f2_dim, "synthetic dimension")->capture_default_str();
  fig2->add_option("--num-queries", f2_nq, "synthetic queries")->capture_default_str();
  fig2->add_option("--seed", f2_seed)->capture_default_str();
  fig2->add_option("--parts", f2_parts)->capture_default_str()->delimiter(',');
  fig2->add_option("--max-degree", f2_degree)->capture_default_str();
  fig2->add_option("--ef", f2_ef)->capture_default_str();
  fig2->add_option("--target-recall", f2_target)->capture_default_str();
  fig2->add_option("-k", f2_k)->capture_default_str();
  fig2->add_option("--l-max", f2_lmax)->capture_default_str();
  fig2->add_option("-o,--out", f2_out, "CSV: parts,l,recall,visited,ratio")->required();

  auto* fig3 = fig->add_subcommand("fig3_traces", "per-evaluation traces of BFS, MCS and DST on one query");
  std::string f3_index, f3_queries, f3_out;
  std::size_t f3_query = 0, f3_k = 10, f3_l = 64;
  std::uint32_t f3_mg = 2, f3_mc = 4;
  fig3->add_option("--index", f3_index)->required()->check(CLI::ExistingFile);
  fig3->add_option("--queries", f3_queries)->required()->check(CLI::ExistingFile);
  fig3->add_option("--query", f3_query, "query row")->capture_default_str();
  fig3->add_option("-k", f3_k)->capture_default_str();
  fig3->add_option("-l", f3_l)->capture_default_str();
  fig3->add_option("--mg", f3_mg, "DST groups")->capture_default_str();
  fig3->add_option("--mc", f3_mc, "MCS and DST candidates per group")->capture_default_str();
  fig3->add_option("-o,--out", f3_out, "CSV: eval_index,candidate_id,candidate_dist,neighbor_id,neighbor_dist,algorithm,mg,mc")
      ->required();

  auto* fig8 = fig->add_subcommand("fig8_scaling", "simulated latency versus BFC units");
  std::string f8_index, f8_queries, f8_out;
  std::size_t f8_k = 10, f8_l = 64;
  std::uint32_t f8_mg = 4, f8_mc = 4;
  std::vector<std::uint32_t> f8_units{1, 2, 3, 4};
  HwOpts f8_hw;
  fig8->add_option("--index", f8_index)->required()->check(CLI::ExistingFile);
  fig8->add_option("--queries", f8_queries)->required()->check(CLI::ExistingFile);
  fig8->add_option("-k", f8_k)->capture_default_str();
  fig8->add_option("-l", f8_l)->capture_default_str();
  fig8->add_option("--mg", f8_mg)->capture_default_str();
  fig8->add_option("--mc", f8_mc)->capture_default_str();
  fig8->add_option("--units", f8_units)->capture_default_str()->delimiter(',');
  fig8->add_option("-o,--out", f8_out, "CSV: units,algo,latency_cycles,speedup")->required();
  f8_hw.attach(fig8);

  // serve
  auto* serve = app.add_subcommand("serve", "TCP search service");
  std::string v_index, v_host = "127.0.0.1", v_mode = "across";
  std::uint16_t v_port = 7447;
  std::size_t v_units = 4, v_pipelines = 4;
  double v_duration = 0;
  SearchOpts v_opts;
  serve->add_option("--index", v_index)->required()->check(CLI::ExistingFile);
  serve->add_option("--host", v_host)->capture_default_str();
  serve->add_option("--port", v_port, "0 picks a free port")->capture_default_str();
  serve->add_option("--mode", v_mode, "across | intra")->capture_default_str();
  serve->add_option("--units", v_units)->capture_default_str();
  serve->add_option("--pipelines", v_pipelines)->capture_default_str();
  serve->add_option("--duration", v_duration, "stop after this many seconds (0 = until SIGINT/SIGTERM)");
  v_opts.attach(serve);

  // query
  auto* query = app.add_subcommand("query", "send queries to a running service");
  std::string q_host = "127.0.0.1", q_queries, q_out;
  std::uint16_t q_port = 7447;
  SearchOpts q_opts;
  query->add_option("--host", q_host)->capture_default_str();
  query->add_option("--port", q_port)->capture_default_str();
  query->add_option("--queries", q_queries)->required()->check(CLI::ExistingFile);
  query->add_option("-o,--out", q_out, "CSV: query,rank,id,distance");
  q_opts.attach(query);

  std::vector<const char*> argv{"falcon"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  auto write_neighbors = [](const std::string& path, const std::vector<std::vector<Neighbor>>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "query,rank,id,distance\n" << std::setprecision(9);
    for (std::size_t q = 0; q < rows.size(); ++q) {
      for (std::size_t r = 0; r < rows[q].size(); ++r) f << q << ',' << r << ',' << rows[q][r].id << ',' << rows[q][r].distance << '\n';
    }
    if (!f.flush()) throw std::runtime_error("write failed on " + path);
  };

  try {
    if (*gen) {
      write_fvecs(generate_synthetic(gen_count, gen_dim, gen_seed, parse_distribution(gen_dist)), gen_out);
      out << "wrote " << gen_count << " x " << gen_dim << " to " << gen_out << '\n';
      return kExitOk;
    }

    if (*build) {
      VectorSet vs = read_fvecs(build_data);
      vs.metric = parse_metric(build_metric);
      const auto t0 = Clock::now();
      GraphIndex g = build_graph(vs, build_degree, build_ef, build_seed);
      g.set_channel_count(build_channels);
      save_index(g, build_out);
      out << "nodes " << g.size() << " edges " << g.edge_count() << " mean_degree " << std::fixed
          << std::setprecision(2) << static_cast<double>(g.edge_count()) / static_cast<double>(g.size())
          << " entry " << g.entry_node() << " build_s " << micros_since(t0) / 1e6 << '\n';
      return kExitOk;
    }

    if (*import) {
      VectorSet vs = read_fvecs(import_data);
      vs.metric = parse_metric(import_metric);
      NodeId entry = 0;
      if (import_entry == "first") {
        entry = 0;
      } else if (import_entry == "medoid") {
        entry = select_entry(vs, EntryStrategy::Medoid);
      } else {
        entry = static_cast<NodeId>(std::stoul(import_entry));
      }
      const ImportResult r = import_adjacency(std::move(vs), import_adj, entry);
      save_index(r.index, import_out);
      out << "nodes " << r.index.size() << " edges " << r.index.edge_count() << " dropped " << r.dropped << '\n';
      if (r.dropped) err << "warning: dropped " << r.dropped << " self-loop or duplicate edges\n";
      return kExitOk;
    }

    if (*gt_cmd) {
      const VectorSet base = read_fvecs(gt_base);
      const VectorSet queries = read_fvecs(gt_queries);
      write_ivecs(compute_ground_truth(base, queries, gt_k), gt_out);
      out << "wrote " << queries.count << " x " << gt_k << " ids to " << gt_out << '\n';
      return kExitOk;
    }

    if (*search_cmd) {
      const GraphIndex g = load_index(s_index);
      const VectorSet queries = read_fvecs(s_queries);
      const SearchParams p = s_opts.params();
      std::vector<std::vector<Neighbor>> rows;
      double hops = 0, visited = 0;
      for (std::size_t q = 0; q < queries.count; ++q) {
        SearchResult r = search(g, queries.row(q), p);
        hops += static_cast<double>(r.stats.hops);
        visited += static_cast<double>(r.stats.visited);
        rows.push_back(std::move(r.neighbors));
      }
      if (!s_out.empty()) write_neighbors(s_out, rows);
      const double n = std::max<double>(1.0, static_cast<double>(queries.count));
      out << "queries " << queries.count << " mean_hops " << hops / n << " mean_visited " << visited / n;
      if (!s_gt.empty()) {
        const GroundTruth gt = load_gt(s_gt, queries, p.k);
        double recall = 0;
        for (std::size_t q = 0; q < queries.count; ++q) recall += recall_at_k(rows[q], gt.row(q), p.k);
        recall /= n;
        out << " recall@" << p.k << ' ' << recall << '\n';
        if (recall < s_min_recall) {
          err << "recall " << recall << " below --min-recall " << s_min_recall << '\n';
          return kExitVerifyFailed;
        }
      } else {
        out << '\n';
      }
      return kExitOk;
    }

    if (*bench) {
      if (b_reps == 0) throw CLI::ValidationError("--repetitions", "must be >= 1");
      const GraphIndex g = load_index(b_index);
      const VectorSet queries = read_fvecs(b_queries);
      const SearchParams p = b_opts.params();
      const GroundTruth gt = load_gt(b_gt, queries, p.k);
      EngineConfig cfg;
      cfg.mode = parse_exec_mode(b_mode);
      cfg.units = b_units;
      cfg.pipelines = b_pipelines;
      cfg.validate();

      std::optional<SubgraphSet> parts;
      std::optional<WorkerPool> units;
      if (cfg.mode == ExecMode::Partitioned) parts = split_subgraphs(g.vectors(), b_parts, b_part_degree, b_part_ef, 1);
      if (cfg.mode == ExecMode::IntraQuery) units.emplace(cfg.units);
      auto run_one = [&](std::size_t q) {
        switch (cfg.mode) {
          case ExecMode::IntraQuery:
            return search_intra(g, queries.row(q), p, *units);
          case ExecMode::Partitioned:
            return search_partitioned(*parts, queries.row(q), p);
          default:
            return search(g, queries.row(q), p);
        }
      };

      std::vector<double> latencies;
      double recall = 0, hops = 0, visited = 0, busy_us = 0;
      for (std::size_t rep = 0; rep < b_reps; ++rep) {
        if (cfg.mode == ExecMode::AcrossQuery && cfg.pipelines > 1) {
          const auto t0 = Clock::now();
          search_batch_across(g, queries, p, cfg);
          busy_us += micros_since(t0);
        }
        for (std::size_t q = 0; q < queries.count; ++q) {
          const auto t0 = Clock::now();
          const SearchResult r = run_one(q);
          const double us = micros_since(t0);
          latencies.push_back(us);
          if (!(cfg.mode == ExecMode::AcrossQuery && cfg.pipelines > 1)) busy_us += us;
          if (rep == 0) {
            recall += recall_at_k(r.neighbors, gt.row(q), p.k);
            hops += static_cast<double>(r.stats.hops);
            visited += static_cast<double>(r.stats.visited);
          }
        }
      }
      const double n = std::max<double>(1.0, static_cast<double>(queries.count));
      const double mean = latencies.empty() ? 0.0 : std::accumulate(latencies.begin(), latencies.end(), 0.0) / static_cast<double>(latencies.size());
      const double median = percentile(latencies, 0.5), p95 = percentile(latencies, 0.95);
      const double qps = busy_us > 0 ? static_cast<double>(queries.count * b_reps) / (busy_us / 1e6) : 0.0;
      recall /= n;
      out << std::fixed << std::setprecision(3) << "algo " << to_string(p.algorithm) << " mode " << to_string(cfg.mode)
          << " k " << p.k << " l " << p.l << " mg " << p.mg << " mc " << p.mc << '\n'
          << "latency_us mean " << mean << " median " << median << " p95 " << p95 << '\n'
          << "qps " << qps << '\n'
          << "recall@" << p.k << ' ' << std::setprecision(4) << recall << " mean_hops " << std::setprecision(1)
          << hops / n << " mean_visited " << visited / n << '\n';
      if (!b_csv.empty()) {
        std::ofstream f(b_csv);
        if (!f) throw std::runtime_error("cannot open " + b_csv);
        f << "algo,mode,k,l,mg,mc,units,pipelines,queries,repetitions,mean_us,median_us,p95_us,qps,recall,hops,visited\n"
          << to_string(p.algorithm) << ',' << to_string(cfg.mode) << ',' << p.k << ',' << p.l << ',' << p.mg << ','
          << p.mc << ',' << cfg.units << ',' << cfg.pipelines << ',' << queries.count << ',' << b_reps << ','
          << mean << ',' << median << ',' << p95 << ',' << qps << ',' << recall << ',' << hops / n << ','
          << visited / n << '\n';
        if (!f.flush()) throw std::runtime_error("write failed on " + b_csv);
      }
      if (recall < b_min_recall) {
        err << "recall " << recall << " below --min-recall " << b_min_recall << '\n';
        return kExitVerifyFailed;
      }
      return kExitOk;
    }

    if (*sweep) {
      const GraphIndex g = load_index(w_index);
      const VectorSet queries = read_fvecs(w_queries);
      const GroundTruth gt = load_gt(w_gt, queries, w_k);
      const auto mgs = one_to(w_mg_max), mcs = one_to(w_mc_max);
      const auto result = sim::sweep_mg_mc(g, queries, gt, SearchParams::bfs(w_k, w_l), w_hw.config(), mgs, mcs, w_threads);
      if (!w_csv.empty()) sim::write_sweep_csv(result, w_csv);
      const auto& best = result.best();
      out << std::fixed << std::setprecision(3) << "cells " << result.cells.size() << " bfs_cycles "
          << result.baseline_cycles << '\n'
          << "best mg " << best.mg << " mc " << best.mc << " speedup " << best.speedup << " recall "
          << best.mean_recall << " hops " << std::setprecision(1) << best.mean_hops << '\n';
      return kExitOk;
    }

    if (*fig2) {
      const VectorSet base = f2_data.empty() ? generate_synthetic(f2_count, f2_dim, f2_seed, Distribution::Gaussian)
                                             : read_fvecs(f2_data);
      const VectorSet queries = f2_queries.empty()
                                    ? generate_synthetic(f2_nq, base.dim, f2_seed + 1, Distribution::Gaussian)
                                    : read_fvecs(f2_queries);
      const GroundTruth gt = compute_ground_truth(base, queries, f2_k);
      const auto points = partition_overhead(base, queries, gt, f2_parts, f2_degree, f2_ef, f2_seed, f2_target, f2_k, f2_lmax);
      write_partition_csv(points, f2_out);
      bool all_reached = true;
      for (const auto& pt : points) {
        out << "parts " << pt.parts << " l " << pt.l << " recall " << pt.mean_recall << " visited " << pt.mean_visited
            << " ratio " << pt.visited_ratio << (pt.reached ? "" : " (target not reached)") << '\n';
        all_reached = all_reached && pt.reached;
      }
      return all_reached ? kExitOk : kExitVerifyFailed;
    }

    if (*fig3) {
      const GraphIndex g = load_index(f3_index);
      const VectorSet queries = read_fvecs(f3_queries);
      if (f3_query >= queries.count) throw CLI::ValidationError("--query", "row out of range");
      std::ofstream f(f3_out);
      if (!f) throw std::runtime_error("cannot open " + f3_out);
      bool header = true;
      for (auto p : {SearchParams::bfs(f3_k, f3_l), SearchParams::mcs(f3_k, f3_l, f3_mc),
                     SearchParams::dst(f3_k, f3_l, f3_mg, f3_mc)}) {
        p.trace = true;
        const SearchResult r = search(g, queries.row(f3_query), p);
        emit_trace_csv(r.stats, p, f, header);
        header = false;
        out << to_string(p.algorithm) << " hops " << r.stats.hops << " distances " << r.stats.dist_computations
            << " best " << (r.neighbors.empty() ? kInvalidNode : r.neighbors[0].id) << '\n';
      }
      if (!f.flush()) throw std::runtime_error("write failed on " + f3_out);
      return kExitOk;
    }

    if (*fig8) {
      const GraphIndex g = load_index(f8_index);
      const VectorSet queries = read_fvecs(f8_queries);
      const SearchParams dst = f8_mg == 1 ? SearchParams::mcs(f8_k, f8_l, f8_mc) : SearchParams::dst(f8_k, f8_l, f8_mg, f8_mc);
      const auto points = sim::simulate_intra_scaling(g, queries, dst, f8_hw.config(), f8_units);
      sim::write_scaling_csv(points, f8_out);
      for (const auto& pt : points) {
        out << to_string(pt.algorithm) << " units " << pt.units << " cycles " << std::fixed << std::setprecision(0)
            << pt.latency_cycles << " speedup " << std::setprecision(3) << pt.speedup << '\n';
      }
      return kExitOk;
    }

    if (*serve) {
      EngineConfig cfg;
      cfg.mode = parse_exec_mode(v_mode);
      cfg.units = v_units;
      cfg.pipelines = v_pipelines;
      auto index = std::make_shared<const GraphIndex>(load_index(v_index));
      auto engine = std::make_shared<SearchEngine>(index, cfg);
      net::SearchServer server(engine, v_opts.params());
      const auto port = server.start(v_host, v_port);
      out << "listening on " << v_host << ':' << port << std::endl;
      g_stop = 0;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const auto t0 = Clock::now();
      while (!g_stop && (v_duration <= 0 || micros_since(t0) < v_duration * 1e6)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      server.stop();
      out << "served " << server.queries_served() << " queries\n";
      return kExitOk;
    }

    if (*query) {
      const VectorSet queries = read_fvecs(q_queries);
      const auto outcome = net::client_query(q_host, q_port, queries, q_opts.params());
      std::vector<std::vector<Neighbor>> rows;
      std::size_t failed = 0;
      for (const auto& r : outcome.responses) {
        if (r.status != wire::Status::Ok) ++failed;
        rows.push_back(r.neighbors);
      }
      if (!q_out.empty()) write_neighbors(q_out, rows);
      out << "responses " << outcome.responses.size() << " of " << queries.count << " errors " << failed << '\n';
      if (outcome.error) {
        err << "transport error: " << outcome.error->what() << '\n';
        return kExitUsage;
      }
      return failed ? kExitVerifyFailed : kExitOk;
    }
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const net::TransportError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace falcon::cli
