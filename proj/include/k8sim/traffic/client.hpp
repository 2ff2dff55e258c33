#pragma once

#include <k8sim/model/types.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace k8sim {

/// A batch of `rps` requests for one workflow.
struct ClientRequest {
  WorkflowData workflow;
  std::int64_t rps = 0;

  bool operator==(const ClientRequest&) const = default;
};

/// A client firing `num_batches` batches, `delay` time units apart, from `start_time` on.
struct ClientSpec {
  ClientRequest request;
  std::int64_t num_batches = 0;
  double delay = 1.0;
  double start_time = 0.0;

  bool operator==(const ClientSpec&) const = default;

  std::optional<std::string> check() const {
    if (request.rps <= 0) return "client rps must be positive";
    if (num_batches < 0) return "number of batches must be non-negative";
    if (!(delay > 0)) return "delay between batches must be positive";
    if (!(start_time >= 0)) return "start time must be non-negative";
    return std::nullopt;
  }
};

struct Emission {
  double time = 0;
  ClientRequest request;
};

inline std::vector<Emission> client_emit_schedule(const ClientSpec& spec) {
  std::vector<Emission> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(spec.num_batches, 0)));
  for (std::int64_t k = 0; k < spec.num_batches; ++k)
    out.push_back({spec.start_time + static_cast<double>(k) * spec.delay, spec.request});
  return out;
}

/// Tick at which an emission time is delivered. The epsilon absorbs
/// accumulated rounding in start + k * delay.
inline Tick emission_tick(double time) { return static_cast<Tick>(std::floor(time + 1e-9)); }

}  // namespace k8sim
