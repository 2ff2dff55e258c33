// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "../support/fixtures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>

using namespace k8sim;
using namespace k8sim::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (s >= budget_s) {
    out.ok = false;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("over time budget");
  }
  if (!out.ok) ++failures;
  std::printf("%s  %2d  %-28s %9.3f s (budget %g s)%s%s\n", out.ok ? "PASS" : "FAIL", id, title, s, budget_s,
              out.detail.empty() ? "" : "  ", out.detail.c_str());
  std::fflush(stdout);
}

Rational R(std::int64_t n, std::int64_t d = 1) { return make_rational(n, d); }

double linear_oracle(const std::vector<std::pair<double, double>>& knots, double x) {
  if (x <= knots.front().first) return knots.front().second * x / knots.front().first;
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (x <= knots[i].first) {
      const auto [x0, y0] = knots[i - 1];
      const auto [x1, y1] = knots[i];
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  if (knots.size() == 1) return knots.back().second * x / knots.back().first;
  const auto [x0, y0] = knots[knots.size() - 2];
  const auto [x1, y1] = knots.back();
  return std::max(0.0, y0 + (y1 - y0) * (x - x0) / (x1 - x0));
}

Outcome fail(std::string why) { return {false, std::move(why)}; }

}  // namespace

int main() {
  const CostTable& table = boutique_table();
  const CostTable excerpt = parse_cost_table(scenario_dir() + "/cost_tables/calibrated-a25.csv");

  criterion(1, "cost-table fidelity", 0.001, [&] {
    struct Case {
      const char *wf, *service;
      int want;
    };
    for (const Case& c : {Case{"workflow1", "frontend", 526}, Case{"workflow1", "currencyservice", 434},
                          Case{"workflow3", "productcatalogservice", 276},
                          Case{"workflow3", "recommendationservice", 135}}) {
      if (interpolate_cost(excerpt, "A", c.wf, c.service, 25) != c.want)
        return fail(std::string(c.service) + " != " + std::to_string(c.want));
    }
    return Outcome{};
  });

  criterion(2, "interpolation oracle", 5.0, [] {
    Gen g(2);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      CostTable t;
      std::vector<std::pair<double, double>> knots;
      std::int64_t rps = 0, cost = 0;
      const int n = static_cast<int>(g.integer(1, 8));
      for (int k = 0; k < n; ++k) {
        rps += g.integer(1, 50);
        cost += g.integer(0, 800);
        t.add("I", "w", rps, "s", {cost, std::nullopt});
        knots.emplace_back(static_cast<double>(rps), static_cast<double>(cost));
      }
      for (int q = 0; q < 100; ++q) {
        const std::int64_t num = g.integer(0, (rps + 50) * 64);
        const double got = to_double(interpolate_cost(t, "I", "w", "s", R(num, 64)));
        const double want = linear_oracle(knots, static_cast<double>(num) / 64.0);
        const double rel = std::fabs(got - want) / std::max(1.0, std::fabs(want));
        worst = std::max(worst, rel);
      }
    }
    if (worst > 1e-9) return fail("worst relative error " + format_sig6(worst));
    return Outcome{true, "worst relative error " + format_sig6(worst)};
  });

  criterion(3, "round-robin split", 2.0, [] {
    if (split_round_robin(10, 4) != std::vector<std::int64_t>{3, 3, 2, 2}) return fail("(10,4)");
    if (split_round_robin(8, 4) != std::vector<std::int64_t>{2, 2, 2, 2}) return fail("(8,4)");
    Gen g(3);
    for (int trial = 0; trial < 10000; ++trial) {
      const auto total = g.integer(0, 1000000);
      const auto n = static_cast<std::size_t>(g.integer(1, 100));
      auto q = split_round_robin(total, n);
      if (std::accumulate(q.begin(), q.end(), std::int64_t{0}) != total) return fail("sum mismatch");
      auto [lo, hi] = std::minmax_element(q.begin(), q.end());
      if (*hi - *lo > 1) return fail("quotas differ by more than one");
    }
    return Outcome{};
  });

  criterion(4, "homogeneity (profile P1)", 5.0, [&] {
    auto r = run_scenario(bundled("profile-P1"), table);
    auto nodes = r.summary.of(EntityKind::Node);
    if (nodes.size() != 4) return fail("expected 4 nodes");
    for (const auto& n : nodes)
      if (n.cpu != nodes.front().cpu)
        return fail("node " + n.id + " " + to_exact_string(n.cpu) + " != " + to_exact_string(nodes.front().cpu));
    return Outcome{true, "every node " + format_sig6(nodes.front().cpu) + " mc"};
  });

  criterion(5, "capacity and conservation", 10.0, [&] {
    for (const auto& name : bundled_names()) {
      const Scenario s = bundled(name);
      std::map<std::string, NodeImage> node_image;
      for (const auto& n : s.nodes) node_image[node_entity_id(n.id)] = s.image(n.image);
      auto r = run_scenario(s, table);
      const auto length = static_cast<std::size_t>(r.series.length());
      std::vector<Rational> node_mem(length), pod_mem(length), service_mem(length);
      std::vector<Rational> node_cpu(length), pod_cpu(length);
      for (const auto& [key, e] : r.series.entities()) {
        for (std::size_t t = 0; t < length; ++t) {
          switch (key.kind) {
            case EntityKind::Node: {
              const auto& img = node_image.at(key.id);
              if (e.cpu[t] > img.cpu_capacity)
                return fail(name + ": node " + key.id + " over capacity at t=" + std::to_string(t));
              if (e.mem[t] > img.mem_capacity || e.mem[t] < 0)
                return fail(name + ": node " + key.id + " memory out of range at t=" + std::to_string(t));
              node_mem[t] += e.mem[t];
              node_cpu[t] += e.cpu[t];
              break;
            }
            case EntityKind::Pod:
              pod_mem[t] += e.mem[t];
              pod_cpu[t] += e.cpu[t];
              break;
            case EntityKind::Service: service_mem[t] += e.mem[t]; break;
          }
        }
      }
      for (std::size_t t = 0; t < length; ++t) {
        if (node_mem[t] != pod_mem[t] || service_mem[t] != pod_mem[t])
          return fail(name + ": memory not conserved at t=" + std::to_string(t));
        if (node_cpu[t] != pod_cpu[t]) return fail(name + ": cpu not conserved at t=" + std::to_string(t));
      }
    }
    return Outcome{true, std::to_string(bundled_names().size()) + " scenarios"};
  });

  criterion(6, "steady-state convergence", 3.0, [&] {
    RunOverrides o;
    o.no_autoscaler = true;
    auto r = run_scenario(bundled("single-a-wf1-25"), table, o);
    for (const auto& row : r.summary.of(EntityKind::Service)) {
      if (row.id != "frontend") continue;
      const double v = to_double(row.cpu);
      const double rel = std::fabs(v - 526.0) / 526.0;
      Outcome out{rel <= 0.01, "frontend " + format_sig6(v) + " mc"};
      return out;
    }
    return fail("no frontend row");
  });

  criterion(7, "scheduler", 2.0, [] {
    std::vector<NodeState> nodes;
    for (std::uint32_t i = 1; i <= 4; ++i) nodes.emplace_back(NodeId{i}, image("A", {{"frontend", 3}}));
    Scheduler rules(PlacementRules{{"frontend", {NodeId{1}, NodeId{2}, NodeId{3}, NodeId{4}}}});
    std::map<std::uint32_t, int> counts;
    for (std::uint32_t p = 0; p < 10; ++p) {
      PodState pod;
      pod.id = PodId{p};
      pod.service = "frontend";
      pod.config = pod_config(100, 2000);
      auto target = rules.deploy_pod(pod, nodes);
      if (!target) return fail("pod left pending");
      ++counts[target->value];
    }
    if (counts != std::map<std::uint32_t, int>{{1, 3}, {2, 3}, {3, 2}, {4, 2}}) return fail("counts differ");

    Gen g(7);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<NodeState> state;
      const int n = static_cast<int>(g.integer(1, 10));
      for (int i = 1; i <= n; ++i) {
        const auto cap = g.integer(1000, 16000);
        state.emplace_back(NodeId{static_cast<std::uint32_t>(i)}, image("A", {{"s", 1}}, cap));
        state.back().reserved_cpu = g.integer(0, cap);
      }
      std::size_t best = 0;
      for (std::size_t i = 1; i < state.size(); ++i)
        if (state[i].unreserved_cpu() > state[best].unreserved_cpu()) best = i;
      PodState pod;
      pod.service = "s";
      pod.config = pod_config(g.integer(1, 2000), 2000);
      const bool fits = state[best].unreserved_cpu() >= pod.config.cpu_request;
      Scheduler free_choice;
      auto got = free_choice.deploy_pod(pod, state);
      if (fits != got.has_value() || (got && *got != state[best].id))
        return fail("trial " + std::to_string(trial) + " chose a node without max free CPU");
    }
    return Outcome{};
  });

  criterion(8, "determinism", 15.0, [&] {
    for (const auto& name : bundled_names()) {
      const Scenario s = bundled(name);
      auto a = run_scenario(s, table);
      auto b = run_scenario(s, table);
      if (series_csv(a.series, false) != series_csv(b.series, false) ||
          series_csv(a.series, true) != series_csv(b.series, true) || summary_csv(a.summary) != summary_csv(b.summary))
        return fail(name + ": CSV differs between runs");
      if (events_log(a.events) != events_log(b.events)) return fail(name + ": event log differs between runs");
    }
    return Outcome{true, std::to_string(bundled_names().size()) + " scenarios x2"};
  });

  criterion(9, "validation math", 1.0, [] {
    MeasuredDataset m;
    m.rows.push_back({"exp", EntityKind::Node, "1", 5500, 1});
    auto r = validate_against_measurements({{EntityKind::Node, "1", 6000, 0}}, m);
    const double e = r.entities.at(0).relative_error;
    return Outcome{std::fabs(e - 0.0909) <= 1e-4, "relative error " + format_sig6(e)};
  });

  criterion(10, "end-to-end scale", 10.0, [&] {
    // Largest heterogeneous bundled scenario by starting pod count.
    std::string largest;
    int most = -1;
    for (const auto& name : bundled_names()) {
      const Scenario s = bundled(name);
      std::set<std::string> images;
      for (const auto& n : s.nodes) images.insert(n.image);
      int pods = 0;
      for (const auto& svc : s.services) pods += svc.service.starting_pods;
      if (images.size() > 1 && pods > most) {
        most = pods;
        largest = name;
      }
    }
    const Scenario s = bundled(largest);
    auto r = run_scenario(s, table);
    return Outcome{r.ticks == 900, largest + ", " + std::to_string(most) + " pods, " + std::to_string(r.ticks) +
                                       " ticks"};
  });

  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
