#pragma once

#include <k8sim/model/cost_table.hpp>

#include <cstdint>
#include <map>
#include <string>

namespace k8sim {

/// How per-workflow cost curves combine when one service serves several
/// workflows on the same node.
enum class WorkflowMix {
  // C(s) = sum_wf (r_wf / T) * Cost(wf, s, T), T = total RPS of s.
  Share,
  // C(s) = sum_wf Cost(wf, s, r_wf).
  Additive,
};

inline const char* to_string(WorkflowMix mode) { return mode == WorkflowMix::Share ? "share" : "additive"; }

/// service -> (workflow -> RPS) as aggregated on one node.
using ServiceWorkflowRps = std::map<std::string, std::map<std::string, std::int64_t>>;

struct ServiceDemand {
  std::int64_t total_rps = 0;
  Millicores cpu = 0;
  MegaBytes mem = 0;
  bool extrapolated = false;

  bool operator==(const ServiceDemand&) const = default;
};

/// Converts a node's per-service, per-workflow RPS into resource demand using
/// the cost curves of `image`. Services with zero total RPS are omitted.
inline std::map<std::string, ServiceDemand> build_service_demand(const CostTable& table, const std::string& image,
                                                                 const ServiceWorkflowRps& rps,
                                                                 WorkflowMix mode = WorkflowMix::Share) {
  std::map<std::string, ServiceDemand> out;
  for (const auto& [service, per_wf] : rps) {
    std::int64_t total = 0;
    for (const auto& [wf, r] : per_wf) {
      if (r < 0) throw std::invalid_argument("negative RPS for service '" + service + "'");
      total += r;
    }
    if (total == 0) continue;

    ServiceDemand d;
    d.total_rps = total;
    for (const auto& [wf, r] : per_wf) {
      if (r == 0) continue;
      if (mode == WorkflowMix::Share) {
        auto c = lookup_cost(table, image, wf, service, Rational(total));
        Rational share = make_rational(r, total);
        d.cpu += share * c.cpu;
        d.mem += share * c.mem;
        d.extrapolated = d.extrapolated || c.extrapolated;
      } else {
        auto c = lookup_cost(table, image, wf, service, Rational(r));
        d.cpu += c.cpu;
        d.mem += c.mem;
        d.extrapolated = d.extrapolated || c.extrapolated;
      }
    }
    out.emplace(service, std::move(d));
  }
  return out;
}

inline std::map<std::string, Millicores> build_service_consumption(const CostTable& table, const std::string& image,
                                                                   const ServiceWorkflowRps& rps,
                                                                   WorkflowMix mode = WorkflowMix::Share) {
  std::map<std::string, Millicores> out;
  for (auto& [service, d] : build_service_demand(table, image, rps, mode)) out.emplace(service, d.cpu);
  return out;
}

}  // namespace k8sim
