#pragma once

#include <k8sim/control/autoscaler.hpp>
#include <k8sim/control/reschedule.hpp>
#include <k8sim/control/scheduler.hpp>
#include <k8sim/metrics/series.hpp>
#include <k8sim/model/consumption.hpp>
#include <k8sim/model/cost_table.hpp>
#include <k8sim/sim/state.hpp>
#include <k8sim/traffic/client.hpp>
#include <k8sim/traffic/load_balancer.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace k8sim {

struct EngineOptions {
  bool autoscaler = false;
  WorkflowMix mix = WorkflowMix::Share;
  // Completes a node's work in one pass when nothing on the node can be
  // deferred this tick. Results are identical to step-by-step processing.
  bool fast_path = true;
};

struct Event {
  Tick time = 0;
  std::string kind;
  std::string detail;

  std::string line() const { return "t=" + std::to_string(time) + " " + kind + (detail.empty() ? "" : " " + detail); }
  bool operator==(const Event&) const = default;
};

/// Run-wide CPU bookkeeping. `granted` always equals completed cost plus the
/// consumed part of in-flight and abandoned requests.
struct WorkAccounting {
  Millicores granted = 0;
  Millicores completed_cost = 0;
  Millicores abandoned_consumed = 0;
  Millicores abandoned_remaining = 0;
  std::uint64_t delivered = 0;
  std::uint64_t completed = 0;
  std::uint64_t abandoned = 0;
  std::int64_t dropped_rps = 0;
};

struct UnfinishedWork {
  std::uint64_t requests = 0;
  Millicores cpu_remaining = 0;
  Millicores cpu_consumed = 0;
  std::uint64_t pending_pods = 0;
};

inline std::string pod_entity_id(const PodState& pod) { return pod.service + "-" + std::to_string(pod.id.value); }
inline std::string node_entity_id(NodeId id) { return std::to_string(id.value); }

/// The logical-time cluster simulation.
///
/// Each tick runs, in order: (1) replenish node CPU budgets and pod
/// allowances whose monitor cycle elapsed, (2) retry queued memory
/// allocations, (3) control plane: autoscaler decisions and placement of
/// pending pods, (4) client emissions routed by the load balancer into node
/// queues, (5) per-node RPS-to-cost conversion into pod work, (6) consumption,
/// (7) memory cool-down rescheduling, (8) sampling, (9) clock advance.
class Cluster {
 public:
  explicit Cluster(CostTable table, EngineOptions options = {}) : table_(std::move(table)), options_(options) {}

  void add_node(NodeId id, NodeImage image) {
    if (node_index_.count(id)) throw std::invalid_argument("duplicate node id " + std::to_string(id.value));
    nodes_.emplace_back(id, std::move(image));
    std::sort(nodes_.begin(), nodes_.end(), [](const NodeState& a, const NodeState& b) { return a.id < b.id; });
    node_index_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_[nodes_[i].id] = i;
    composition_ok_[id] = true;
  }

  /// Registers a service and queues its starting pods for placement.
  void add_service(const ServiceSpec& spec) {
    if (services_.count(spec.service.name))
      throw std::invalid_argument("duplicate service '" + spec.service.name + "'");
    services_[spec.service.name].spec = spec;
    for (int i = 0; i < spec.service.starting_pods; ++i) create_pod(spec.service.name);
  }

  void set_placement_rules(PlacementRules rules) { scheduler_ = Scheduler(std::move(rules)); }

  void add_client(const ClientSpec& spec) { clients_.push_back({spec, 0}); }

  std::vector<Event> tick() {
    tick_events_.clear();
    replenish();
    retry_memory();
    control_plane();
    route_traffic();
    convert_requests();
    for (auto& node : nodes_) consume(node);
    memory_cooldowns();
    sample();
    ++now_;
    events_.insert(events_.end(), tick_events_.begin(), tick_events_.end());
    return tick_events_;
  }

  void run(Tick ticks) {
    for (Tick t = 0; t < ticks; ++t) tick();
  }

  Tick now() const { return now_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  const std::vector<PodState>& pods() const { return pods_; }
  const PodState& pod(PodId id) const { return pods_.at(id.value); }
  const NodeState& node(NodeId id) const { return nodes_.at(node_index_.at(id)); }
  const ConsumptionSeries& series() const { return series_; }
  const std::vector<Event>& events() const { return events_; }
  const WorkAccounting& accounting() const { return accounting_; }
  const EngineOptions& options() const { return options_; }
  const CostTable& table() const { return table_; }

  /// Non-removed pods (placed or pending) of a service.
  int pod_count(const std::string& service) const {
    int n = 0;
    for (const auto& p : pods_)
      if (p.service == service && !p.removed) ++n;
    return n;
  }

  PodPlacement placement() const {
    PodPlacement out;
    for (const auto& node : nodes_)
      for (PodId id : node.hosted_pods) ++out[pods_[id.value].service][node.id];
    return out;
  }

  UnfinishedWork unfinished() const {
    UnfinishedWork u;
    for (const auto& p : pods_) {
      if (p.removed) continue;
      if (!p.host) ++u.pending_pods;
      for (const auto& r : p.active) {
        ++u.requests;
        u.cpu_remaining += r.remaining;
        u.cpu_consumed += r.consumed;
      }
    }
    return u;
  }

  /// Checks the engine's state invariants; throws std::logic_error on the first violation.
  void check_invariants() const {
    auto fail = [](const std::string& what) { throw std::logic_error("invariant violated: " + what); };
    for (const auto& node : nodes_) {
      const auto& cap = node.image.cpu_capacity;
      const std::string n = "node " + node_entity_id(node.id);
      if (node.cpu_budget < 0 || node.cpu_budget > cap) fail(n + " cpu budget out of range");
      if (node.free_mem < 0 || node.free_mem > node.image.mem_capacity) fail(n + " free memory out of range");
      if (node.reserved_cpu > cap) fail(n + " reservations exceed capacity");
      MegaBytes held = 0;
      Millicores reserved = 0;
      for (PodId id : node.hosted_pods) {
        const auto& p = pods_[id.value];
        if (!p.host || *p.host != node.id) fail("pod " + pod_entity_id(p) + " hosted list mismatch");
        held += p.held_memory();
        reserved += p.config.cpu_request;
      }
      if (node.image.mem_capacity - node.free_mem != held) fail(n + " memory conservation");
      if (reserved != node.reserved_cpu) fail(n + " reservation bookkeeping");
    }
    Millicores in_flight = 0;
    for (const auto& p : pods_) {
      if (p.available_cpu < 0 || p.available_cpu > p.config.cpu_limit) fail("pod " + pod_entity_id(p) + " allowance");
      if (p.cpu_this_cycle > p.config.cpu_limit) fail("pod " + pod_entity_id(p) + " exceeded its cpu limit");
      for (const auto& r : p.active) in_flight += r.consumed;
    }
    if (accounting_.granted != accounting_.completed_cost + in_flight + accounting_.abandoned_consumed)
      fail("work conservation");
  }

 private:
  struct ServiceRecord {
    ServiceSpec spec;
    ScalerState scaler;
  };

  struct PodTotal {
    PodId pod;
    Millicores cost = 0;
    MegaBytes mem = 0;
    std::uint64_t count = 0;
  };

  struct ConversionMemo {
    bool valid = false;
    std::vector<PodTotal> totals;  // per pod, in assignment order
    Millicores node_cost = 0;
    MegaBytes node_mem = 0;
    std::vector<NodeRequest> inbound;
    std::map<std::string, std::vector<PodId>> local;
    Conversion conversion;
  };

  struct ClientCursor {
    ClientSpec spec;
    std::int64_t next_batch = 0;
  };

  NodeState& node_ref(NodeId id) { return nodes_.at(node_index_.at(id)); }

  void log(std::string kind, std::string detail) {
    tick_events_.push_back({now_, std::move(kind), std::move(detail)});
  }

  PodId create_pod(const std::string& service) {
    const auto& spec = services_.at(service).spec;
    PodState pod;
    pod.id = PodId{static_cast<std::uint32_t>(pods_.size())};
    pod.service = service;
    pod.config = spec.pod;
    pod.created = now_;
    pods_.push_back(std::move(pod));
    pod_ids_.push_back(pod_entity_id(pods_.back()));
    pending_.push_back(pods_.back().id);
    return pods_.back().id;
  }

  // (1)
  void replenish() {
    for (auto& node : nodes_) node.cpu_budget = node.image.cpu_capacity;
    for (auto& p : pods_) {
      if (!p.placed()) continue;
      if (now_ - p.cycle_start >= p.config.monitor_cycle) {
        p.available_cpu = p.config.cpu_limit;
        p.cpu_this_cycle = 0;
        p.cycle_start = now_;
      }
    }
  }

  // (2)
  void retry_memory() {
    for (auto& node : nodes_) apply_memory_grants(retry_pending_memory(node));
  }

  void apply_memory_grants(const std::vector<MemoryWait>& grants) {
    for (const auto& g : grants) {
      auto& pod = pods_.at(g.pod.value);
      for (auto& r : pod.active) {
        if (r.id != g.request) continue;
        r.mem_allocated = true;
        r.pending_since = -1;
      }
    }
  }

  // (3)
  void control_plane() {
    if (options_.autoscaler && now_ > 0) autoscale();

    bool changed = false;
    std::deque<PodId> still_pending;
    while (!pending_.empty()) {
      PodId id = pending_.front();
      pending_.pop_front();
      auto& pod = pods_[id.value];
      if (pod.removed) continue;
      auto target = scheduler_.deploy_pod(pod, nodes_);
      if (!target) {
        still_pending.push_back(id);
        continue;
      }
      attach(pod, node_ref(*target));
      changed = true;
      log("pod_placed", "pod=" + pod_entity_id(pod) + " node=" + node_entity_id(*target));
    }
    pending_ = std::move(still_pending);
    for (PodId id : pending_) {
      if (!pending_logged_.insert(id.value).second) continue;
      log("pod_pending", "pod=" + pod_entity_id(pods_[id.value]));
    }
    if (changed || removed_this_tick_) check_compositions();
    removed_this_tick_ = false;
  }

  void attach(PodState& pod, NodeState& node) {
    pod.host = node.id;
    node.hosted_pods.insert(std::lower_bound(node.hosted_pods.begin(), node.hosted_pods.end(), pod.id), pod.id);
    pod.available_cpu = pod.config.cpu_limit;
    pod.cycle_start = now_;
    pod.cpu_this_cycle = 0;
    pod.cpu_since_scale = 0;
    pod.scale_window_start = now_;
    pending_logged_.erase(pod.id.value);
    for (auto& r : pod.active) {
      if (r.mem_allocated) continue;
      if (allocate_memory(node, MemoryWait{pod.id, r.id, r.request.memory, now_}) == MemoryGrant::Allocated) {
        r.mem_allocated = true;
        r.pending_since = -1;
      } else {
        r.pending_since = now_;
      }
    }
  }

  void check_compositions() {
    for (const auto& node : nodes_) {
      std::map<std::string, int> actual;
      for (PodId id : node.hosted_pods) ++actual[pods_[id.value].service];
      const bool ok = actual == node.image.pods;
      bool& was_ok = composition_ok_[node.id];
      if (!ok && was_ok) log("composition_mismatch", "node=" + node_entity_id(node.id) + " image=" + node.image.id);
      was_ok = ok;
    }
  }

  void autoscale() {
    for (auto& [name, record] : services_) {
      const auto& cfg = record.spec.service;
      if (now_ % cfg.scaler_cycle != 0) continue;

      std::vector<double> utilization;
      std::vector<const PodState*> candidates;
      for (auto& p : pods_) {
        if (p.service != name || p.removed) continue;
        candidates.push_back(&p);
        if (!p.placed()) continue;
        const Tick span = now_ - p.scale_window_start;
        if (span <= 0) continue;
        utilization.push_back(to_double(p.cpu_since_scale / (p.config.cpu_request * span)));
      }
      const int count = static_cast<int>(candidates.size());
      auto decision = autoscale_cycle(cfg, utilization, count, record.scaler, now_);
      for (auto& p : pods_) {
        if (p.service != name) continue;
        p.cpu_since_scale = 0;
        p.scale_window_start = now_;
      }

      if (decision == ScaleDecision::ScaleUp) {
        PodId id = create_pod(name);
        log("scale_up", "service=" + name + " pod=" + pod_entity_id(pods_[id.value]) +
                            " pods=" + std::to_string(count + 1));
      } else if (decision == ScaleDecision::ScaleDown) {
        auto victim = pick_downscale_victim(candidates);
        if (!victim) continue;
        const std::string label = pod_entity_id(pods_[victim->value]);
        remove_pod(pods_[victim->value]);
        log("scale_down", "service=" + name + " pod=" + label + " pods=" + std::to_string(count - 1));
      }
    }
  }

  void remove_pod(PodState& pod) {
    if (pod.host) {
      NodeState& node = node_ref(*pod.host);
      MegaBytes returned = 0;
      for (auto& r : pod.active) {
        if (r.mem_allocated)
          returned += r.request.memory;
        else if (r.pending_since >= 0)
          cancel_memory_wait(node, pod.id, r.id);
      }
      node.hosted_pods.erase(std::remove(node.hosted_pods.begin(), node.hosted_pods.end(), pod.id),
                             node.hosted_pods.end());
      node.reserved_cpu -= pod.config.cpu_request;
      pod.host.reset();
      for (auto& r : pod.active) {
        accounting_.abandoned_consumed += r.consumed;
        accounting_.abandoned_remaining += r.remaining;
        ++accounting_.abandoned;
      }
      pod.active.clear();
      apply_memory_grants(release_memory(node, returned));
    } else {
      for (auto& r : pod.active) {
        accounting_.abandoned_consumed += r.consumed;
        accounting_.abandoned_remaining += r.remaining;
        ++accounting_.abandoned;
      }
      pod.active.clear();
    }
    pod.removed = true;
    pod.available_cpu = 0;
    std::erase(pending_, pod.id);
    removed_this_tick_ = true;
  }

  // (4)
  void route_traffic() {
    if (clients_.empty()) return;
    const PodPlacement placed = placement();
    for (auto& c : clients_) {
      while (c.next_batch < c.spec.num_batches) {
        const double t = c.spec.start_time + static_cast<double>(c.next_batch) * c.spec.delay;
        if (emission_tick(t) > now_) break;
        ++c.next_batch;
        route_batch(c.spec.request, placed);
      }
    }
  }

  void route_batch(const ClientRequest& request, const PodPlacement& placed) {
    ClientRequest routable = request;
    routable.workflow.services.clear();
    for (const auto& s : request.workflow.services) {
      auto it = placed.find(s);
      if (it != placed.end() && !it->second.empty()) {
        routable.workflow.services.push_back(s);
      } else {
        accounting_.dropped_rps += request.rps;
        log("unroutable", "workflow=" + request.workflow.name + " service=" + s + " rps=" + std::to_string(request.rps));
      }
    }
    for (auto& routed : balancer_.balance(routable, placed)) node_ref(routed.node).inbound.push_back(routed.request);
  }

  // (5)
  void convert_requests() {
    for (auto& node : nodes_) {
      if (node.inbound.empty()) continue;
      std::map<std::string, std::vector<PodId>> local;
      for (PodId id : node.hosted_pods) local[pods_[id.value].service].push_back(id);
      // Steady traffic repeats the same inputs tick after tick.
      auto& memo = conversion_memo_[node.id];
      if (!memo.valid || memo.inbound != node.inbound || memo.local != local) {
        memo.conversion = node_convert_rps(node, node.inbound, table_, local, options_.mix);
        memo.totals.clear();
        memo.node_cost = 0;
        memo.node_mem = 0;
        for (const auto& a : memo.conversion.assignments) {
          if (memo.totals.empty() || memo.totals.back().pod != a.pod) memo.totals.push_back({a.pod});
          auto& t = memo.totals.back();
          t.cost += a.request.cost;
          t.mem += a.request.memory;
          ++t.count;
          memo.node_cost += a.request.cost;
          memo.node_mem += a.request.memory;
        }
        memo.inbound = node.inbound;
        memo.local = std::move(local);
        memo.valid = true;
      }
      node.inbound.clear();
      log_extrapolation(node, memo.conversion);
      if (options_.fast_path && completes_instantly(node, memo)) {
        apply_instant(node, memo);
        continue;
      }
      Conversion conversion = memo.conversion;

      for (auto& a : conversion.assignments) {
        auto& pod = pods_[a.pod.value];
        ActiveRequest r;
        r.id = next_request_++;
        r.arrival = now_;
        r.step = a.request.cost / pod.config.cost_granularity;
        r.remaining = a.request.cost;
        r.request = std::move(a.request);
        if (allocate_memory(node, MemoryWait{pod.id, r.id, r.request.memory, now_}) == MemoryGrant::Allocated) {
          r.mem_allocated = true;
        } else {
          r.pending_since = now_;
          log("memory_pending", "pod=" + pod_entity_id(pod) + " node=" + node_entity_id(node.id) +
                                    " mb=" + format_sig6(r.request.memory));
        }
        pod.active.push_back(std::move(r));
        ++accounting_.delivered;
      }
    }
  }

  void log_extrapolation(const NodeState& node, const Conversion& conversion) {
    for (const auto& [service, demand] : conversion.demand) {
      if (!demand.extrapolated) continue;
      if (!extrapolation_logged_.insert({node.image.table_key(), service}).second) continue;
      log("extrapolation", "image=" + node.image.table_key() + " service=" + service +
                               " rps=" + std::to_string(demand.total_rps));
    }
  }

  // The new work finishes within this tick exactly as the fast path would run
  // it: nothing is carried over, all memory fits and no budget binds.
  bool completes_instantly(const NodeState& node, const ConversionMemo& memo) const {
    if (!node.pending_mem.empty() || memo.node_mem > node.free_mem || memo.node_cost > node.cpu_budget) return false;
    for (PodId id : node.hosted_pods)
      if (!pods_[id.value].active.empty()) return false;
    for (const auto& t : memo.totals) {
      const auto& pod = pods_[t.pod.value];
      if (t.cost > 0 && t.cost > pod.available_cpu) return false;
    }
    return true;
  }

  void apply_instant(NodeState& node, const ConversionMemo& memo) {
    for (const auto& t : memo.totals) {
      auto& pod = pods_[t.pod.value];
      pod.available_cpu -= t.cost;
      pod.cpu_this_tick += t.cost;
      pod.cpu_this_cycle += t.cost;
      pod.cpu_since_scale += t.cost;
      next_request_ += t.count;
      accounting_.delivered += t.count;
      accounting_.completed += t.count;
    }
    node.cpu_budget -= memo.node_cost;
    node.cpu_this_tick += memo.node_cost;
    accounting_.granted += memo.node_cost;
    accounting_.completed_cost += memo.node_cost;
  }

  // (6)
  void grant(PodState& pod, ActiveRequest& r, const Millicores& amount) {
    pod.available_cpu -= amount;
    pod.cpu_this_tick += amount;
    pod.cpu_this_cycle += amount;
    pod.cpu_since_scale += amount;
    r.remaining -= amount;
    r.consumed += amount;
    accounting_.granted += amount;
  }

  // Completes finished requests of `pod`, releasing their memory. Returns
  // true when a release let queued allocations through.
  bool complete_finished(PodState& pod, NodeState& node) {
    bool unblocked = false;
    for (auto it = pod.active.begin(); it != pod.active.end();) {
      if (!it->mem_allocated || it->remaining != 0) {
        ++it;
        continue;
      }
      accounting_.completed_cost += it->request.cost;
      ++accounting_.completed;
      MegaBytes mem = it->request.memory;
      it = pod.active.erase(it);
      if (mem > 0) {
        auto grants = release_memory(node, mem);
        unblocked = unblocked || !grants.empty();
        apply_memory_grants(grants);
      }
    }
    return unblocked;
  }

  bool fits_in_one_pass(const NodeState& node) const {
    if (!node.pending_mem.empty()) return false;
    Millicores node_total = 0;
    for (PodId id : node.hosted_pods) {
      const auto& pod = pods_[id.value];
      Millicores pod_total = 0;
      for (const auto& r : pod.active) {
        if (!r.mem_allocated) return false;
        pod_total += r.remaining;
      }
      if (pod_total > 0 && pod_total > pod.available_cpu) return false;
      node_total += pod_total;
    }
    return node_total <= node.cpu_budget;
  }

  void consume(NodeState& node) {
    if (options_.fast_path && fits_in_one_pass(node)) {
      for (PodId id : node.hosted_pods) {
        auto& pod = pods_[id.value];
        for (auto& r : pod.active) {
          if (r.remaining == 0) continue;
          Millicores amount = r.remaining;
          consume_cpu(node, amount, pod);
          grant(pod, r, amount);
        }
        complete_finished(pod, node);
      }
      return;
    }

    bool deferred = false;
    bool progress = true;
    while (progress) {
      progress = false;
      for (PodId id : node.hosted_pods) {
        auto& pod = pods_[id.value];
        for (auto& r : pod.active) {
          if (!r.mem_allocated || r.remaining == 0) continue;
          if (pod.available_cpu <= 0) break;
          Millicores amount = r.step < r.remaining ? r.step : r.remaining;
          if (amount > pod.available_cpu) amount = pod.available_cpu;
          if (consume_cpu(node, amount, pod) == CpuGrant::Deferred) {
            deferred = true;
            continue;
          }
          grant(pod, r, amount);
          progress = true;
        }
        if (complete_finished(pod, node)) progress = true;
      }
    }
    if (deferred)
      log("cpu_saturated", "node=" + node_entity_id(node.id) + " budget_left=" + format_sig6(node.cpu_budget));
  }

  // (7)
  void memory_cooldowns() {
    for (auto& node : nodes_) {
      const std::vector<PodId> hosted = node.hosted_pods;
      bool detached = false;
      for (PodId id : hosted) {
        auto& pod = pods_[id.value];
        auto ev = memory_cooldown_reschedule(pod, node, now_);
        if (!ev) continue;
        detached = true;
        pending_.push_back(pod.id);
        log("memory_reschedule", "pod=" + pod_entity_id(pod) + " node=" + node_entity_id(node.id) +
                                     " waited=" + std::to_string(ev->waited));
      }
      if (detached) {
        apply_memory_grants(retry_pending_memory(node));
        removed_this_tick_ = true;
      }
    }
  }

  // (8)
  void sample() {
    std::vector<MetricSample> samples;
    samples.reserve(pods_.size() + nodes_.size() + services_.size());
    std::map<std::string, std::pair<Millicores, MegaBytes>> per_service;
    for (const auto& [name, record] : services_) per_service[name];
    for (auto& p : pods_) {
      // Removed pods stay in the series as zeros through padding.
      if (p.removed) continue;
      MegaBytes held = p.held_memory();
      samples.push_back({now_, {EntityKind::Pod, pod_ids_[p.id.value]}, p.service, p.cpu_this_tick, held});
      auto& agg = per_service[p.service];
      agg.first += p.cpu_this_tick;
      agg.second += held;
      p.cpu_this_tick = 0;
    }
    for (auto& node : nodes_) {
      samples.push_back({now_, {EntityKind::Node, node_entity_id(node.id)}, "", node.cpu_this_tick,
                         node.image.mem_capacity - node.free_mem});
      node.cpu_this_tick = 0;
    }
    for (auto& [name, agg] : per_service)
      samples.push_back({now_, {EntityKind::Service, name}, name, agg.first, agg.second});
    series_.record_tick(now_, samples);
  }

  CostTable table_;
  EngineOptions options_;
  Tick now_ = 0;
  std::vector<NodeState> nodes_;
  std::map<NodeId, std::size_t> node_index_;
  std::vector<PodState> pods_;
  std::vector<std::string> pod_ids_;  // entity id per pod, by pod id
  std::map<std::string, ServiceRecord> services_;
  std::deque<PodId> pending_;
  std::set<std::uint32_t> pending_logged_;
  std::vector<ClientCursor> clients_;
  Scheduler scheduler_;
  LoadBalancer balancer_;
  ConsumptionSeries series_;
  WorkAccounting accounting_;
  std::vector<Event> events_;
  std::vector<Event> tick_events_;
  std::map<NodeId, bool> composition_ok_;
  std::set<std::pair<std::string, std::string>> extrapolation_logged_;
  std::map<NodeId, ConversionMemo> conversion_memo_;
  std::uint64_t next_request_ = 0;
  bool removed_this_tick_ = false;
};

}  // namespace k8sim
