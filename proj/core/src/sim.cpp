#include "falcon/sim.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace falcon::sim {

std::string_view stage_name(Stage stage) noexcept {
  static constexpr std::array<std::string_view, kStageCount> names = {"S1", "S2", "S3", "S4", "S5", "S6"};
  return names[static_cast<std::size_t>(stage)];
}

void HwConfig::validate() const {
  if (clock_mhz <= 0.0) throw std::invalid_argument("HwConfig: clock_mhz must be positive");
  if (channels == 0 || bfc_units == 0 || qpps == 0) {
    throw std::invalid_argument("HwConfig: channels, bfc_units and qpps must be positive");
  }
  if (mem_bytes_per_cycle == 0 || max_outstanding == 0 || queue_insert_cycles_per_elem == 0 ||
      queue_pop_cycles == 0 || bloom_check_cycles_per_elem == 0 || dist_elems_per_cycle == 0) {
    throw std::invalid_argument("HwConfig: per-element costs and widths must be positive");
  }
}

HwConfig HwConfig::illustrative() {
  HwConfig hw;
  hw.bfc_units = 1;
  hw.dist_elems_per_cycle = 2;
  hw.dist_pipeline_depth = 4;
  return hw;
}

std::uint64_t SimReport::completed_by(std::uint64_t cycle) const noexcept {
  std::uint64_t n = 0;
  for (const auto& [at, count] : completed_candidates_timeline) {
    if (at > cycle) break;
    n = count;
  }
  return n;
}

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// In-order pipelined server: one new item every `ii` cycles.
struct FifoServer {
  std::uint64_t next_free = 0;

  std::uint64_t reserve(std::uint64_t arrival, std::uint64_t ii) {
    const std::uint64_t start = std::max(arrival, next_free);
    next_free = start + ii;
    return start;
  }
};

// A requester's port into the memory system, with an outstanding-request window.
struct FetchPort {
  FifoServer slot;
  std::multiset<std::uint64_t> in_flight;
};

enum class EventKind { EdgeIssue, EdgeDone, VectorIssue, VectorDone, DistDone, InsertDone, QueuePump, ItemDone };

struct Event {
  std::uint64_t cycle;
  std::uint64_t order;
  EventKind kind;
  std::uint64_t group;
  std::uint32_t candidate;
  NodeId node;
};

struct LaterFirst {
  bool operator()(const Event& a, const Event& b) const noexcept {
    return std::tie(a.cycle, a.order) > std::tie(b.cycle, b.order);
  }
};

struct GroupState {
  GroupTask task;
  std::size_t outstanding = 0;
  bool done = false;
  std::uint64_t done_cycle = 0;
};

// Times candidate groups for the DST coordinator with a discrete-event model.
class TimedEvaluator final : public GroupEvaluator {
 public:
  TimedEvaluator(const GraphIndex& index, const HwConfig& hw, std::size_t queue_size)
      : index_(index),
        hw_(hw),
        sort_cycles_(HwConfig::queue_sort_cycles(queue_size)),
        vector_beats_(ceil_div(index.dim() * 4, hw.mem_bytes_per_cycle)),
        compute_ii_(ceil_div(index.dim(), hw.dist_elems_per_cycle)),
        channels_(hw.channels),
        channel_busy_(hw.channels),
        unit_ports_(hw.bfc_units),
        bloom_(hw.bfc_units),
        compute_(hw.bfc_units) {}

  void launch(const GraphIndex&, std::span<const float> query, GroupTask task) override {
    query_ = query;
    const auto seq = task.seq;
    GroupState g;
    g.task = std::move(task);
    for (const auto& p : g.task.pending) g.outstanding += 1 + p.size();
    groups_.emplace(seq, std::move(g));
    launched_.push_back(seq);
    // Pops are coordinator actions: reserve them now, in coordinator order, so a
    // later group's sort cannot jump ahead of this launch on the queue server.
    const auto& g_ref = groups_.at(seq);
    for (std::uint32_t i = 0; i < g_ref.task.candidates.size(); ++i) {
      const std::uint64_t start = queue_.reserve(coord_free_, hw_.queue_pop_cycles);
      record(Stage::S1, start, start + hw_.queue_pop_cycles);
      schedule(start + hw_.queue_pop_cycles, EventKind::EdgeIssue, seq, i);
    }
  }

  GroupOutcome next_completion(CompletionPolicy policy) override {
    if (launched_.empty()) throw std::logic_error("TimedEvaluator: no group in flight");
    std::uint64_t seq = 0;
    if (policy == CompletionPolicy::FifoDeterministic) {
      seq = launched_.front();
      while (!groups_.at(seq).done) step();
    } else {
      while (arrivals_.empty()) step();
      seq = arrivals_.front();
    }
    std::erase(launched_, seq);
    std::erase(arrivals_, seq);

    GroupState g = std::move(groups_.at(seq));
    groups_.erase(seq);

    // Synchronization point: sort the queues before anything else is extracted.
    const std::uint64_t arrival = std::max(g.done_cycle, coord_free_);
    const std::uint64_t start = queue_.reserve(arrival, sort_cycles_);
    record(Stage::S6, start, start + sort_cycles_);
    coord_free_ = start + sort_cycles_;
    completed_ += g.task.candidates.size();
    timeline_.emplace_back(coord_free_, completed_);
    order_.push_back(seq);
    return evaluate_group(index_, query_, g.task);
  }

  SimReport report(SearchResult result) {
    while (!events_.empty()) step();
    SimReport r;
    r.total_cycles = std::max(coord_free_, clock_);
    std::vector<Interval> fetch_compute;
    for (std::size_t s = 0; s < kStageCount; ++s) {
      r.busy[s] = union_length(stage_intervals_[s]);
      r.utilization[s] = r.total_cycles ? static_cast<double>(r.busy[s]) / static_cast<double>(r.total_cycles) : 0.0;
    }
    fetch_compute = stage_intervals_[static_cast<std::size_t>(Stage::S3)];
    const auto& s4 = stage_intervals_[static_cast<std::size_t>(Stage::S4)];
    fetch_compute.insert(fetch_compute.end(), s4.begin(), s4.end());
    r.fetch_compute_utilization =
        r.total_cycles ? static_cast<double>(union_length(fetch_compute)) / static_cast<double>(r.total_cycles) : 0.0;
    r.completed_candidates_timeline = std::move(timeline_);
    r.completion_order = std::move(order_);
    r.channel_busy = std::move(channel_busy_);
    r.visited = result.stats.visited;
    r.hops = result.stats.hops;
    r.result = std::move(result);
    return r;
  }

 private:
  void schedule(std::uint64_t cycle, EventKind kind, std::uint64_t group, std::uint32_t candidate = 0,
                NodeId node = kInvalidNode) {
    events_.push({std::max(cycle, clock_), next_order_++, kind, group, candidate, node});
  }

  void record(Stage stage, std::uint64_t begin, std::uint64_t end) {
    if (end > begin) stage_intervals_[static_cast<std::size_t>(stage)].push_back({begin, end});
  }

  std::uint32_t unit_of(NodeId n) const noexcept { return (n % channels_) % hw_.bfc_units; }

  // Issues one memory request; returns its completion cycle.
  std::uint64_t memory_request(FetchPort& port, std::uint32_t channel, std::uint64_t beats, std::uint64_t arrival) {
    std::uint64_t issue = std::max({arrival, port.slot.next_free, channel_bus_[channel].next_free});
    while (port.in_flight.size() >= hw_.max_outstanding) {
      issue = std::max(issue, *port.in_flight.begin());
      port.in_flight.erase(port.in_flight.begin());
    }
    while (!port.in_flight.empty() && *port.in_flight.begin() <= issue) port.in_flight.erase(port.in_flight.begin());
    port.slot.next_free = issue + beats;
    channel_bus_[channel].next_free = issue + beats;
    const std::uint64_t data_begin = issue + hw_.mem_latency_cycles;
    const std::uint64_t done = data_begin + beats;
    auto& bus = channel_busy_[channel];
    if (!bus.empty() && bus.back().end > data_begin) {
      throw std::logic_error("sim: overlapping transfers on channel " + std::to_string(channel));
    }
    bus.push_back({data_begin, done});
    port.in_flight.insert(done);
    return done;
  }

  void item_done(std::uint64_t seq, std::uint64_t cycle) {
    auto& g = groups_.at(seq);
    if (--g.outstanding == 0) {
      g.done = true;
      g.done_cycle = cycle;
      arrivals_.push_back(seq);
    }
  }

  // The queue takes one insertion at a time; waiting results of the oldest group
  // go first, since the coordinator synchronizes groups in launch order.
  void pump_inserts(std::uint64_t t) {
    if (inserting_ || insert_wait_.empty()) return;
    if (queue_.next_free > t) {
      if (!pump_scheduled_) {
        pump_scheduled_ = true;
        schedule(queue_.next_free, EventKind::QueuePump, 0);
      }
      return;
    }
    const auto [group, node] = *insert_wait_.begin();
    insert_wait_.erase(insert_wait_.begin());
    const std::uint64_t start = queue_.reserve(t, hw_.queue_insert_cycles_per_elem);
    const std::uint64_t end = start + hw_.queue_insert_cycles_per_elem;
    record(Stage::S5, start, end);
    inserting_ = true;
    schedule(end, EventKind::InsertDone, group, 0, node);
  }

  void step() {
    if (events_.empty()) throw std::logic_error("sim: event queue drained with groups outstanding");
    const Event ev = events_.top();
    events_.pop();
    clock_ = ev.cycle;
    const std::uint64_t t = ev.cycle;

    switch (ev.kind) {
      case EventKind::EdgeIssue: {
        const NodeId c = groups_.at(ev.group).task.candidates[ev.candidate].id;
        const std::uint64_t beats =
            std::max<std::uint64_t>(1, ceil_div(std::uint64_t{index_.degree(c)} * 4 + hw_.edge_header_bytes,
                                                hw_.mem_bytes_per_cycle));
        const std::uint64_t done = memory_request(control_port_, index_.channel_of(c) % channels_, beats, t);
        record(Stage::S1, t, done);
        schedule(done, EventKind::EdgeDone, ev.group, ev.candidate);
        break;
      }
      case EventKind::EdgeDone: {
        const auto& g = groups_.at(ev.group);
        const NodeId c = g.task.candidates[ev.candidate].id;
        const auto& pending = g.task.pending[ev.candidate];
        std::size_t next_pending = 0;
        std::uint64_t last = t;
        for (NodeId n : index_.neighbors(c)) {
          const std::uint32_t u = unit_of(n);
          const std::uint64_t start = bloom_[u].reserve(t, hw_.bloom_check_cycles_per_elem);
          const std::uint64_t end = start + hw_.bloom_check_cycles_per_elem;
          record(Stage::S2, start, end);
          last = std::max(last, end);
          if (next_pending < pending.size() && pending[next_pending] == n) {
            ++next_pending;
            schedule(end, EventKind::VectorIssue, ev.group, ev.candidate, n);
          }
        }
        schedule(last, EventKind::ItemDone, ev.group, ev.candidate);
        break;
      }
      case EventKind::VectorIssue: {
        const std::uint32_t u = unit_of(ev.node);
        const std::uint64_t done = memory_request(unit_ports_[u], index_.channel_of(ev.node) % channels_, vector_beats_, t);
        record(Stage::S3, t, done);
        schedule(done, EventKind::VectorDone, ev.group, ev.candidate, ev.node);
        break;
      }
      case EventKind::VectorDone: {
        const std::uint32_t u = unit_of(ev.node);
        const std::uint64_t start = compute_[u].reserve(t, compute_ii_);
        const std::uint64_t finish = start + compute_ii_ + hw_.dist_pipeline_depth;
        record(Stage::S4, start, finish);
        schedule(finish, EventKind::DistDone, ev.group, ev.candidate, ev.node);
        break;
      }
      case EventKind::DistDone:
        insert_wait_.insert({ev.group, ev.node});
        pump_inserts(t);
        break;
      case EventKind::InsertDone:
        inserting_ = false;
        item_done(ev.group, t);
        pump_inserts(t);
        break;
      case EventKind::QueuePump:
        pump_scheduled_ = false;
        pump_inserts(t);
        break;
      case EventKind::ItemDone:
        item_done(ev.group, t);
        break;
    }
  }

  static std::uint64_t union_length(std::vector<Interval> intervals) {
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
    std::uint64_t total = 0;
    std::uint64_t cur_begin = 0, cur_end = 0;
    bool open = false;
    for (const auto& iv : intervals) {
      if (!open || iv.begin > cur_end) {
        if (open) total += cur_end - cur_begin;
        cur_begin = iv.begin;
        cur_end = iv.end;
        open = true;
      } else {
        cur_end = std::max(cur_end, iv.end);
      }
    }
    if (open) total += cur_end - cur_begin;
    return total;
  }

  const GraphIndex& index_;
  const HwConfig& hw_;
  std::span<const float> query_;
  const std::uint64_t sort_cycles_;
  const std::uint64_t vector_beats_;
  const std::uint64_t compute_ii_;
  const std::uint32_t channels_;

  std::priority_queue<Event, std::vector<Event>, LaterFirst> events_;
  std::uint64_t next_order_ = 0;
  std::uint64_t clock_ = 0;
  std::uint64_t coord_free_ = 0;

  std::map<std::uint64_t, GroupState> groups_;
  std::vector<std::uint64_t> launched_;
  std::vector<std::uint64_t> arrivals_;

  FifoServer queue_;
  std::set<std::pair<std::uint64_t, NodeId>> insert_wait_;
  bool inserting_ = false;
  bool pump_scheduled_ = false;
  FetchPort control_port_;
  std::vector<FifoServer> channel_bus_ = std::vector<FifoServer>(channels_);
  std::vector<std::vector<Interval>> channel_busy_;
  std::vector<FetchPort> unit_ports_;
  std::vector<FifoServer> bloom_;
  std::vector<FifoServer> compute_;
  std::array<std::vector<Interval>, kStageCount> stage_intervals_;

  std::uint64_t completed_ = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> timeline_;
  std::vector<std::uint64_t> order_;
};

}  // namespace

SimReport simulate_query(const GraphIndex& index, std::span<const float> query, const SearchParams& params,
                         const HwConfig& hw) {
  hw.validate();
  params.validate();
  SearchParams dst = params;
  dst.algorithm = Algorithm::DST;
  TimedEvaluator evaluator(index, hw, params.l);
  SearchResult result = dst_search(index, query, dst, evaluator);
  return evaluator.report(std::move(result));
}

}  // namespace falcon::sim
