#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "falcon/traversal.hpp"

namespace falcon {

namespace {

std::string fmt_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

}  // namespace

void emit_trace_csv(const SearchStats& stats, const SearchParams& params, std::ostream& out, bool header) {
  if (header) out << "eval_index,candidate_id,candidate_dist,neighbor_id,neighbor_dist,algorithm,mg,mc\n";
  const std::string tail = "," + std::string(to_string(params.algorithm)) + "," + std::to_string(params.mg) +
                           "," + std::to_string(params.mc) + "\n";
  for (const auto& ev : stats.trace) {
    const std::string head =
        std::to_string(ev.step) + "," + std::to_string(ev.candidate) + "," + fmt_float(ev.candidate_distance);
    out << head << ",," << tail;
    for (const auto& n : ev.neighbors) {
      out << head << "," << n.id << "," << fmt_float(n.distance) << tail;
    }
  }
}

void emit_trace_csv(const SearchStats& stats, const SearchParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_trace_csv: cannot open " + path.string());
  emit_trace_csv(stats, params, out);
  out.flush();
  if (!out) throw std::runtime_error("emit_trace_csv: write failed on " + path.string());
}

}  // namespace falcon
