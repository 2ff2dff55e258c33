#pragma once

#include <k8sim/sim/state.hpp>

#include <algorithm>
#include <optional>

namespace k8sim {

struct RescheduleEvent {
  PodId pod;
  NodeId from;
  Tick waited = 0;
};

/// Oldest memory wait among the pod's requests, if any.
inline std::optional<Tick> oldest_memory_wait(const PodState& pod) {
  std::optional<Tick> oldest;
  for (const auto& r : pod.active)
    if (!r.mem_allocated && r.pending_since >= 0 && (!oldest || r.pending_since < *oldest)) oldest = r.pending_since;
  return oldest;
}

/// Detaches a pod whose memory allocation has waited at least its memory
/// cool-down. Queued allocations are cancelled and memory held by the pod's
/// other requests is returned to the node; request progress is kept so the
/// work resumes wherever the scheduler places the pod next. The node's CPU
/// reservation for the pod is released.
inline std::optional<RescheduleEvent> memory_cooldown_reschedule(PodState& pod, NodeState& node, Tick now) {
  if (!pod.host || *pod.host != node.id) return std::nullopt;
  auto oldest = oldest_memory_wait(pod);
  if (!oldest || now - *oldest < pod.config.memory_cooldown) return std::nullopt;

  MegaBytes returned = 0;
  for (auto& r : pod.active) {
    if (r.mem_allocated) {
      returned += r.request.memory;
      r.mem_allocated = false;
    } else if (r.pending_since >= 0) {
      cancel_memory_wait(node, pod.id, r.id);
    }
    r.pending_since = -1;
  }
  // The node's queue is not drained here; the caller retries it.
  node.free_mem += returned;

  node.hosted_pods.erase(std::remove(node.hosted_pods.begin(), node.hosted_pods.end(), pod.id),
                         node.hosted_pods.end());
  node.reserved_cpu -= pod.config.cpu_request;
  pod.host.reset();
  return RescheduleEvent{pod.id, node.id, now - *oldest};
}

}  // namespace k8sim
