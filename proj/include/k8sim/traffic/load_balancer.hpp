#pragma once

#include <k8sim/errors.hpp>
#include <k8sim/model/types.hpp>
#include <k8sim/traffic/client.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace k8sim {

/// A service's share of a client batch, addressed to one node.
struct NodeRequest {
  std::string service;
  std::string workflow;
  std::int64_t rps = 0;

  bool operator==(const NodeRequest&) const = default;
};

struct RoutedRequest {
  NodeId node;
  NodeRequest request;

  bool operator==(const RoutedRequest&) const = default;
};

/// Splits `total` into `n` quotas. The first `total % n` positions get the
/// larger share; the split does not depend on earlier calls.
inline std::vector<std::int64_t> split_round_robin(std::int64_t total, std::size_t n) {
  if (n == 0) throw std::invalid_argument("split_round_robin: n must be positive");
  if (total < 0) throw std::invalid_argument("split_round_robin: total must be non-negative");
  const auto count = static_cast<std::int64_t>(n);
  std::vector<std::int64_t> quotas(n, total / count);
  const auto remainder = static_cast<std::size_t>(total % count);
  for (std::size_t i = 0; i < remainder; ++i) ++quotas[i];
  return quotas;
}

/// service -> (node -> number of placed pods).
using PodPlacement = std::map<std::string, std::map<NodeId, int>>;

/// Stable round-robin order of a service's pods: the first pod of every node
/// (by node id), then the second pod of every node, and so on. Remainders of
/// a split thus land on distinct nodes first.
inline std::vector<NodeId> pod_slot_order(const std::map<NodeId, int>& pods_per_node) {
  std::vector<NodeId> slots;
  for (int rank = 0;; ++rank) {
    bool any = false;
    for (const auto& [node, count] : pods_per_node) {
      if (count > rank) {
        slots.push_back(node);
        any = true;
      }
    }
    if (!any) break;
  }
  return slots;
}

enum class BalancingPolicy {
  RoundRobin,
};

inline const char* to_string(BalancingPolicy) { return "round_robin"; }

/// The master load balancer: fans a client batch out into per-node service
/// requests according to where the service's pods run.
class LoadBalancer {
 public:
  explicit LoadBalancer(BalancingPolicy policy = BalancingPolicy::RoundRobin) : policy_(policy) {}

  BalancingPolicy policy() const { return policy_; }

  std::vector<RoutedRequest> balance(const ClientRequest& request, const PodPlacement& placement) const {
    std::vector<RoutedRequest> out;
    for (const auto& service : request.workflow.services) {
      auto it = placement.find(service);
      std::vector<NodeId> slots;
      if (it != placement.end()) slots = pod_slot_order(it->second);
      if (slots.empty())
        throw UnroutableService("service '" + service + "' of workflow '" + request.workflow.name +
                                "' has no placed pods");

      auto quotas = split_round_robin(request.rps, slots.size());
      std::map<NodeId, std::int64_t> per_node;
      for (std::size_t i = 0; i < slots.size(); ++i) per_node[slots[i]] += quotas[i];
      for (const auto& [node, rps] : per_node) {
        if (rps == 0) continue;
        out.push_back({node, NodeRequest{service, request.workflow.name, rps}});
      }
    }
    return out;
  }

 private:
  BalancingPolicy policy_;
};

inline std::vector<RoutedRequest> balance_client_request(const LoadBalancer& lb, const ClientRequest& request,
                                                         const PodPlacement& placement) {
  return lb.balance(request, placement);
}

}  // namespace k8sim
