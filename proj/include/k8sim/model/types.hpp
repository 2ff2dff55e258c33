#pragma once

#include <k8sim/rational.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace k8sim {

/// Logical time, in ticks. One tick models one second, so RPS values are
/// per-tick rates and millicores are per-tick budgets.
using Tick = std::int64_t;

struct NodeId {
  std::uint32_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

struct PodId {
  std::uint32_t value = 0;
  auto operator<=>(const PodId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }
inline std::ostream& operator<<(std::ostream& os, PodId id) { return os << id.value; }

/// A named user-facing action and the services it activates in parallel.
struct WorkflowData {
  std::string name;
  std::vector<std::string> services;

  bool operator==(const WorkflowData&) const = default;

  /// Empty when the invariants hold, otherwise a description of the first violation.
  std::optional<std::string> check() const {
    if (name.empty()) return "workflow name is empty";
    if (services.empty()) return "workflow '" + name + "' activates no services";
    std::set<std::string> seen;
    for (const auto& s : services) {
      if (!seen.insert(s).second) return "workflow '" + name + "' lists service '" + s + "' twice";
    }
    return std::nullopt;
  }
};

/// A calibrated node configuration: capacities plus the fixed pod composition
/// for which its cost table was sampled.
struct NodeImage {
  std::string id;
  Millicores cpu_capacity = 0;
  MegaBytes mem_capacity = 0;
  std::map<std::string, int> pods;
  // Image key in the cost table; defaults to `id` when empty.
  std::string cost_table_image;

  bool operator==(const NodeImage&) const = default;

  const std::string& table_key() const { return cost_table_image.empty() ? id : cost_table_image; }

  std::optional<std::string> check() const {
    if (id.empty()) return "image id is empty";
    if (cpu_capacity <= 0) return "image '" + id + "': cpu capacity must be positive";
    if (mem_capacity <= 0) return "image '" + id + "': memory capacity must be positive";
    if (pods.empty()) return "image '" + id + "': pod set is empty";
    for (const auto& [service, count] : pods) {
      if (count <= 0) return "image '" + id + "': pod count for '" + service + "' must be positive";
    }
    return std::nullopt;
  }
};

struct PodConfig {
  Tick monitor_cycle = 1;
  Tick memory_cooldown = 0;
  Millicores cpu_request = 0;
  // Allowance per monitor cycle.
  Millicores cpu_limit = 0;
  int cost_granularity = 1;

  bool operator==(const PodConfig&) const = default;

  std::optional<std::string> check() const {
    if (monitor_cycle <= 0) return "monitor cycle must be positive";
    if (memory_cooldown < 0) return "memory cooldown must be non-negative";
    if (cpu_request <= 0) return "cpu request must be positive";
    if (cpu_request > cpu_limit) return "cpu request exceeds cpu limit";
    if (cost_granularity < 1) return "cost granularity must be at least 1";
    return std::nullopt;
  }
};

struct ServiceConfig {
  std::string name;
  int starting_pods = 1;
  int min_pods = 1;
  int max_pods = 1;
  Tick scaler_cycle = 1;
  double upscale_threshold = 0.8;
  double downscale_threshold = 0.2;
  int downscale_period = 1;

  bool operator==(const ServiceConfig&) const = default;

  std::optional<std::string> check() const {
    if (name.empty()) return "service name is empty";
    if (min_pods < 0) return "service '" + name + "': min pods must be non-negative";
    if (!(min_pods <= starting_pods && starting_pods <= max_pods))
      return "service '" + name + "': requires min_pods <= starting_pods <= max_pods";
    if (scaler_cycle <= 0) return "service '" + name + "': scaler cycle must be positive";
    if (upscale_threshold < 0 || upscale_threshold > 1 || downscale_threshold < 0 || downscale_threshold > 1)
      return "service '" + name + "': thresholds must lie in [0, 1]";
    if (!(downscale_threshold < upscale_threshold))
      return "service '" + name + "': downscale threshold must be below upscale threshold";
    if (downscale_period < 1) return "service '" + name + "': downscale period must be at least 1";
    return std::nullopt;
  }
};

/// A service together with the configuration of every pod it runs.
struct ServiceSpec {
  ServiceConfig service;
  PodConfig pod;

  bool operator==(const ServiceSpec&) const = default;
};

}  // namespace k8sim
