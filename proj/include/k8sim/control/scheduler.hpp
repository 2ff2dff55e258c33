#pragma once

#include <k8sim/model/types.hpp>
#include <k8sim/sim/state.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace k8sim {

/// service -> ordered node list, cycled when exhausted.
using PlacementRules = std::map<std::string, std::vector<NodeId>>;

/// Places pods on nodes. With a rule for the pod's service the next node of
/// the cycled rule list is the only candidate; otherwise the node with the
/// most unreserved CPU is chosen (lowest id on ties). A pod is placed only if
/// the candidate can reserve its cpu request; otherwise it stays pending and
/// the same candidate slot is retried later.
class Scheduler {
 public:
  Scheduler() = default;
  explicit Scheduler(PlacementRules rules) : rules_(std::move(rules)) {}

  const PlacementRules& rules() const { return rules_; }

  /// Reserves `pod.config.cpu_request` on the chosen node and returns it;
  /// nullopt means Pending. `nodes` must be sorted by id.
  std::optional<NodeId> deploy_pod(const PodState& pod, std::span<NodeState> nodes) {
    const Millicores& request = pod.config.cpu_request;
    NodeState* target = nullptr;

    auto rule = rules_.find(pod.service);
    if (rule != rules_.end() && !rule->second.empty()) {
      std::size_t& cursor = cursors_[pod.service];
      NodeId wanted = rule->second[cursor % rule->second.size()];
      for (auto& n : nodes)
        if (n.id == wanted) target = &n;
      if (target == nullptr || target->unreserved_cpu() < request) return std::nullopt;
      ++cursor;
    } else {
      for (auto& n : nodes) {
        if (target == nullptr || n.unreserved_cpu() > target->unreserved_cpu()) target = &n;
      }
      if (target == nullptr || target->unreserved_cpu() < request) return std::nullopt;
    }

    target->reserved_cpu += request;
    return target->id;
  }

 private:
  PlacementRules rules_;
  std::map<std::string, std::size_t> cursors_;
};

}  // namespace k8sim
