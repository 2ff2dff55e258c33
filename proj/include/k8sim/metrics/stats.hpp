#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace k8sim {

struct BalanceStats {
  // max / min; +infinity when the least loaded node is idle and another is not.
  double max_min_ratio = 1.0;
  double stddev = 0.0;  // population
  double spread = 0.0;  // max - min
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

inline BalanceStats balance_stats(std::span<const double> per_node) {
  if (per_node.empty()) throw std::invalid_argument("balance_stats: no nodes");
  BalanceStats s;
  auto [lo, hi] = std::minmax_element(per_node.begin(), per_node.end());
  s.min = *lo;
  s.max = *hi;
  s.spread = s.max - s.min;
  double sum = 0;
  for (double v : per_node) sum += v;
  s.mean = sum / static_cast<double>(per_node.size());
  double sq = 0;
  for (double v : per_node) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(per_node.size()));
  if (s.min == 0)
    s.max_min_ratio = s.max == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  else
    s.max_min_ratio = s.max / s.min;
  return s;
}

}  // namespace k8sim
