#pragma once

#include <k8sim/model/types.hpp>
#include <k8sim/sim/state.hpp>

#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace k8sim {

enum class ScaleDecision { Hold, ScaleUp, ScaleDown };

inline const char* to_string(ScaleDecision d) {
  switch (d) {
    case ScaleDecision::Hold: return "hold";
    case ScaleDecision::ScaleUp: return "scale_up";
    case ScaleDecision::ScaleDown: return "scale_down";
  }
  return "?";
}

struct ScalerState {
  // Consecutive evaluated cycles with average utilization below the downscale threshold.
  int below_cycles = 0;
  Tick last_decision = -1;
};

/// Threshold rule, evaluated once per scaler cycle. Scales up by one pod when
/// the average utilization exceeds the upscale threshold, down by one after
/// `downscale_period` consecutive cycles below the downscale threshold, and
/// never leaves [min_pods, max_pods].
///
/// `utilization` holds, per placed pod, consumed CPU over the cycle divided by
/// the pod's cpu request for the same span.
inline ScaleDecision autoscale_cycle(const ServiceConfig& config, std::span<const double> utilization,
                                     int current_pods, ScalerState& state, Tick now = 0) {
  if (utilization.empty()) {
    state.below_cycles = 0;
    return ScaleDecision::Hold;
  }
  const double avg = std::accumulate(utilization.begin(), utilization.end(), 0.0) /
                     static_cast<double>(utilization.size());

  if (avg > config.upscale_threshold) {
    state.below_cycles = 0;
    if (current_pods < config.max_pods) {
      state.last_decision = now;
      return ScaleDecision::ScaleUp;
    }
    return ScaleDecision::Hold;
  }
  if (avg < config.downscale_threshold) {
    ++state.below_cycles;
    if (state.below_cycles >= config.downscale_period && current_pods > config.min_pods) {
      state.below_cycles = 0;
      state.last_decision = now;
      return ScaleDecision::ScaleDown;
    }
    return ScaleDecision::Hold;
  }
  state.below_cycles = 0;
  return ScaleDecision::Hold;
}

/// Pod to remove on scale-down: fewest in-flight requests, highest id on ties.
inline std::optional<PodId> pick_downscale_victim(std::span<const PodState* const> pods) {
  const PodState* best = nullptr;
  for (const auto* p : pods) {
    if (best == nullptr || p->active.size() < best->active.size() ||
        (p->active.size() == best->active.size() && p->id > best->id))
      best = p;
  }
  if (best == nullptr) return std::nullopt;
  return best->id;
}

}  // namespace k8sim
