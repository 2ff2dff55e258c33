#pragma once

#include <k8sim/io/csv.hpp>
#include <k8sim/io/run.hpp>
#include <k8sim/metrics/stats.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

namespace k8sim {

struct ComparisonEntry {
  std::string name;
  std::size_t input_index = 0;
  std::size_t rank = 0;  // 1-based
  BalanceStats balance;
  double total_load = 0;
  // Exact node extremes and total; ranking uses these, not the doubles.
  Millicores min_load = 0;
  Millicores max_load = 0;
  Millicores total = 0;
  std::vector<SummaryRow> nodes;
  std::vector<SummaryRow> services;
  // True when the balance ratio equals the previous entry's.
  bool tied_with_previous = false;
};

struct ComparisonReport {
  std::vector<ComparisonEntry> ranked;
  // Ratio difference between the best and the runner-up.
  double ratio_gap = 0;
};

namespace detail {

// Three-way comparison of max/min without division. An idle minimum gives an
// infinite ratio unless every node is idle (ratio 1).
inline int compare_ratio(const ComparisonEntry& a, const ComparisonEntry& b) {
  auto infinite = [](const ComparisonEntry& e) { return e.min_load == 0 && e.max_load != 0; };
  auto all_idle = [](const ComparisonEntry& e) { return e.max_load == 0; };
  if (infinite(a) || infinite(b)) return infinite(a) == infinite(b) ? 0 : (infinite(a) ? 1 : -1);
  // Ratio 1 for an idle cluster: compare as max == min.
  const Millicores a_max = all_idle(a) ? Millicores(1) : a.max_load;
  const Millicores a_min = all_idle(a) ? Millicores(1) : a.min_load;
  const Millicores b_max = all_idle(b) ? Millicores(1) : b.max_load;
  const Millicores b_min = all_idle(b) ? Millicores(1) : b.min_load;
  const Rational lhs = a_max * b_min;
  const Rational rhs = b_max * a_min;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

}  // namespace detail

/// Ranks configurations by max/min node load ratio, ascending. Equal ratios
/// fall back to total node load, then input order.
inline ComparisonReport compare_scenarios(const std::vector<ResultSummary>& results) {
  if (results.size() < 2) throw std::invalid_argument("compare_scenarios: at least two results are required");
  ComparisonReport report;
  for (std::size_t i = 0; i < results.size(); ++i) {
    ComparisonEntry e;
    e.name = results[i].name;
    e.input_index = i;
    e.nodes = results[i].of(EntityKind::Node);
    e.services = results[i].of(EntityKind::Service);
    if (e.nodes.empty()) throw std::invalid_argument("compare_scenarios: result '" + e.name + "' has no nodes");
    std::vector<double> loads;
    e.min_load = e.max_load = e.nodes.front().cpu;
    for (const auto& n : e.nodes) {
      loads.push_back(to_double(n.cpu));
      e.total += n.cpu;
      if (n.cpu < e.min_load) e.min_load = n.cpu;
      if (n.cpu > e.max_load) e.max_load = n.cpu;
    }
    e.balance = balance_stats(loads);
    e.total_load = to_double(e.total);
    report.ranked.push_back(std::move(e));
  }
  std::stable_sort(report.ranked.begin(), report.ranked.end(), [](const ComparisonEntry& a, const ComparisonEntry& b) {
    int c = detail::compare_ratio(a, b);
    if (c != 0) return c < 0;
    return a.total < b.total;
  });
  for (std::size_t i = 0; i < report.ranked.size(); ++i) {
    report.ranked[i].rank = i + 1;
    if (i > 0) report.ranked[i].tied_with_previous = detail::compare_ratio(report.ranked[i], report.ranked[i - 1]) == 0;
  }
  const double a = report.ranked[0].balance.max_min_ratio;
  const double b = report.ranked[1].balance.max_min_ratio;
  report.ratio_gap = (std::isinf(a) && std::isinf(b)) ? 0.0 : b - a;
  return report;
}

inline std::string comparison_csv(const ComparisonReport& report) {
  std::string out = "rank,name,max_min_ratio,stddev_millicores,spread_millicores,total_millicores,tied\n";
  for (const auto& e : report.ranked) {
    const double r = e.balance.max_min_ratio;
    out += std::to_string(e.rank) + "," + e.name + "," + (std::isinf(r) ? std::string("inf") : format_sig6(r)) + "," +
           format_sig6(e.balance.stddev) + "," + format_sig6(e.balance.spread) + "," + format_sig6(e.total_load) +
           "," + (e.tied_with_previous ? "yes" : "no") + "\n";
  }
  return out;
}

/// Side-by-side averages: one row per entity, one column per configuration.
inline std::string comparison_side_by_side_csv(const ComparisonReport& report) {
  std::vector<const ComparisonEntry*> by_input(report.ranked.size());
  for (const auto& e : report.ranked) by_input[e.input_index] = &e;
  std::string out = "entity_kind,entity_id";
  for (const auto* e : by_input) out += "," + e->name;
  out += "\n";
  auto emit = [&](EntityKind kind, auto rows_of) {
    std::vector<std::string> ids;
    for (const auto* e : by_input)
      for (const auto& r : rows_of(*e))
        if (std::find(ids.begin(), ids.end(), r.id) == ids.end()) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
      out += std::string(to_string(kind)) + "," + id;
      for (const auto* e : by_input) {
        out += ",";
        for (const auto& r : rows_of(*e))
          if (r.id == id) out += format_sig6(r.cpu);
      }
      out += "\n";
    }
  };
  emit(EntityKind::Node, [](const ComparisonEntry& e) -> const std::vector<SummaryRow>& { return e.nodes; });
  emit(EntityKind::Service, [](const ComparisonEntry& e) -> const std::vector<SummaryRow>& { return e.services; });
  return out;
}

/// Runs independent simulations on up to `workers` threads. Each job owns its
/// cluster; results come back in job order.
inline std::vector<RunResult> run_many(const std::vector<std::function<RunResult()>>& jobs, unsigned workers = 0) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<RunResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < std::min<std::size_t>(workers, jobs.size()); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        try {
          results[i] = jobs[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace k8sim
