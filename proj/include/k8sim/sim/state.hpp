#pragma once

#include <k8sim/errors.hpp>
#include <k8sim/model/consumption.hpp>
#include <k8sim/model/types.hpp>
#include <k8sim/traffic/load_balancer.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace k8sim {

/// Work handed to one pod: `rps_quota` requests costing `cost` millicores in total.
struct PodRequest {
  std::string service;
  Millicores cost = 0;
  MegaBytes memory = 0;
  std::int64_t rps_quota = 0;

  bool operator==(const PodRequest&) const = default;
};

/// Progress record of a PodRequest being processed.
struct ActiveRequest {
  std::uint64_t id = 0;
  PodRequest request;
  Millicores step = 0;
  Millicores remaining = 0;
  Millicores consumed = 0;
  bool mem_allocated = false;
  // Tick at which the memory allocation started waiting; -1 when not waiting.
  Tick pending_since = -1;
  Tick arrival = 0;
};

struct PodState {
  PodId id;
  std::string service;
  PodConfig config;
  std::optional<NodeId> host;  // nullopt while pending
  Millicores available_cpu = 0;
  Tick cycle_start = 0;
  std::deque<ActiveRequest> active;
  bool removed = false;
  Tick created = 0;

  // Bookkeeping for sampling, the pod-limit invariant and the autoscaler.
  Millicores cpu_this_tick = 0;
  Millicores cpu_this_cycle = 0;
  Millicores cpu_since_scale = 0;
  Tick scale_window_start = 0;

  bool placed() const { return host.has_value() && !removed; }

  MegaBytes held_memory() const {
    MegaBytes held = 0;
    for (const auto& r : active)
      if (r.mem_allocated) held += r.request.memory;
    return held;
  }
};

struct MemoryWait {
  PodId pod;
  std::uint64_t request = 0;
  MegaBytes amount = 0;
  Tick since = 0;

  bool operator==(const MemoryWait&) const = default;
};

struct NodeState {
  NodeId id;
  NodeImage image;
  Millicores cpu_budget = 0;
  MegaBytes free_mem = 0;
  Millicores reserved_cpu = 0;
  std::vector<PodId> hosted_pods;  // ascending id
  std::vector<NodeRequest> inbound;
  std::deque<MemoryWait> pending_mem;
  Millicores cpu_this_tick = 0;

  NodeState() = default;
  NodeState(NodeId node_id, NodeImage node_image)
      : id(node_id), image(std::move(node_image)), cpu_budget(image.cpu_capacity), free_mem(image.mem_capacity) {}

  Millicores unreserved_cpu() const { return image.cpu_capacity - reserved_cpu; }
};

// ---------------------------------------------------------------------------
// CPU

enum class CpuGrant { Granted, Deferred };

/// All-or-nothing grant of `amount` from the node's budget for this interval.
inline CpuGrant consume_cpu(NodeState& node, const Millicores& amount, const PodState& pod) {
  if (amount < 0) throw std::invalid_argument("consume_cpu: negative amount");
  if (!pod.host || *pod.host != node.id)
    throw std::logic_error("consume_cpu: pod " + std::to_string(pod.id.value) + " is not hosted on node " +
                           std::to_string(node.id.value));
  if (node.cpu_budget < amount) return CpuGrant::Deferred;
  node.cpu_budget -= amount;
  node.cpu_this_tick += amount;
  if (node.cpu_this_tick > node.image.cpu_capacity)
    throw std::logic_error("consume_cpu: node " + std::to_string(node.id.value) + " exceeded its capacity");
  return CpuGrant::Granted;
}

// ---------------------------------------------------------------------------
// Memory

enum class MemoryGrant { Allocated, Pending };

/// Allocates immediately when nothing is queued and enough memory is free,
/// otherwise queues the request FIFO. Zero-sized allocations always succeed.
inline MemoryGrant allocate_memory(NodeState& node, const MemoryWait& request) {
  if (request.amount < 0) throw std::invalid_argument("allocate_memory: negative amount");
  if (request.amount == 0) return MemoryGrant::Allocated;
  if (node.pending_mem.empty() && node.free_mem >= request.amount) {
    node.free_mem -= request.amount;
    return MemoryGrant::Allocated;
  }
  node.pending_mem.push_back(request);
  return MemoryGrant::Pending;
}

/// Serves queued allocations in order while the head fits. Returns the
/// allocations that were granted.
inline std::vector<MemoryWait> retry_pending_memory(NodeState& node) {
  std::vector<MemoryWait> granted;
  while (!node.pending_mem.empty() && node.free_mem >= node.pending_mem.front().amount) {
    node.free_mem -= node.pending_mem.front().amount;
    granted.push_back(node.pending_mem.front());
    node.pending_mem.pop_front();
  }
  return granted;
}

inline std::vector<MemoryWait> release_memory(NodeState& node, const MegaBytes& amount) {
  if (amount < 0) throw std::invalid_argument("release_memory: negative amount");
  if (node.free_mem + amount > node.image.mem_capacity)
    throw ReleaseOverflow("node " + std::to_string(node.id.value) + " would exceed its memory capacity");
  node.free_mem += amount;
  return retry_pending_memory(node);
}

/// Drops a queued allocation. Returns false when it was not queued. Callers
/// retry the queue afterwards since a new head may fit.
inline bool cancel_memory_wait(NodeState& node, PodId pod, std::uint64_t request) {
  auto it = std::find_if(node.pending_mem.begin(), node.pending_mem.end(),
                         [&](const MemoryWait& w) { return w.pod == pod && w.request == request; });
  if (it == node.pending_mem.end()) return false;
  node.pending_mem.erase(it);
  return true;
}

// ---------------------------------------------------------------------------
// RPS -> per-pod work

struct PodAssignment {
  PodId pod;
  PodRequest request;

  bool operator==(const PodAssignment&) const = default;
};

struct Conversion {
  std::vector<PodAssignment> assignments;
  std::map<std::string, ServiceDemand> demand;
};

/// Turns a node's queued service requests into per-pod work: aggregates RPS
/// per (service, workflow), prices each service with the node's cost curves,
/// and splits the service's RPS round-robin over its local pods (ascending id),
/// each pod carrying cost per request times its quota.
///
/// `local_pods` maps each service to the ids of its pods on this node.
inline Conversion node_convert_rps(const NodeState& node, std::span<const NodeRequest> queued, const CostTable& table,
                                   const std::map<std::string, std::vector<PodId>>& local_pods,
                                   WorkflowMix mode = WorkflowMix::Share) {
  Conversion out;
  if (queued.empty()) return out;

  ServiceWorkflowRps rps;
  for (const auto& req : queued) {
    if (req.rps < 0) throw std::invalid_argument("negative node request RPS");
    rps[req.service][req.workflow] += req.rps;
  }
  for (const auto& [service, per_wf] : rps) {
    auto it = local_pods.find(service);
    if (it == local_pods.end() || it->second.empty())
      throw OrphanService("node " + std::to_string(node.id.value) + " received requests for '" + service +
                          "' but hosts none of its pods");
  }

  out.demand = build_service_demand(table, node.image.table_key(), rps, mode);
  for (const auto& [service, demand] : out.demand) {
    const auto& pods = local_pods.at(service);
    auto quotas = split_round_robin(demand.total_rps, pods.size());
    const Millicores cpu_per_request = demand.cpu / demand.total_rps;
    const MegaBytes mem_per_request = demand.mem / demand.total_rps;
    for (std::size_t i = 0; i < pods.size(); ++i) {
      PodRequest req;
      req.service = service;
      req.rps_quota = quotas[i];
      req.cost = cpu_per_request * quotas[i];
      req.memory = mem_per_request * quotas[i];
      out.assignments.push_back({pods[i], std::move(req)});
    }
  }
  return out;
}

}  // namespace k8sim
