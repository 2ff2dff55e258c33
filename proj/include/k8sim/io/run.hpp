#pragma once

#include <k8sim/io/scenario.hpp>
#include <k8sim/metrics/series.hpp>
#include <k8sim/model/cost_table.hpp>
#include <k8sim/sim/cluster.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace k8sim {

struct RunOverrides {
  std::optional<Tick> ticks;
  bool no_autoscaler = false;
  std::optional<WorkflowMix> mix;
  bool fast_path = true;
};

struct SummaryRow {
  EntityKind kind = EntityKind::Node;
  std::string id;
  Millicores cpu = 0;
  MegaBytes mem = 0;

  bool operator==(const SummaryRow&) const = default;
};

/// Trimmed-window averages for every pod, node and service.
struct ResultSummary {
  std::string name;
  Tick ticks = 0;
  Window window;
  std::vector<SummaryRow> rows;

  std::vector<SummaryRow> of(EntityKind kind) const {
    std::vector<SummaryRow> out;
    for (const auto& r : rows)
      if (r.kind == kind) out.push_back(r);
    return out;
  }

  bool operator==(const ResultSummary&) const = default;
};

struct RunResult {
  std::string name;
  Tick ticks = 0;
  EngineOptions options;
  ConsumptionSeries series;
  std::vector<Event> events;
  WorkAccounting accounting;
  UnfinishedWork unfinished;
  ResultSummary summary;
};

inline ResultSummary summarize(const std::string& name, const ConsumptionSeries& series) {
  ResultSummary s;
  s.name = name;
  s.ticks = series.length();
  s.window = trimmed_window(series.length());
  for (GroupBy g : {GroupBy::Pod, GroupBy::Node, GroupBy::Service}) {
    for (auto& [id, avg] : aggregate(series, g, s.window)) s.rows.push_back({kind_of(g), id, avg.cpu, avg.mem});
  }
  return s;
}

/// Every (image, workflow) pair the run can touch must be in the table, with
/// an entry for each service the image hosts.
inline void check_coverage(const Scenario& scenario, const CostTable& table) {
  std::set<std::string> used_workflows;
  for (const auto& c : scenario.clients) used_workflows.insert(c.request.workflow.name);
  std::vector<std::string> missing;
  std::set<std::string> images_in_use;
  for (const auto& n : scenario.nodes) images_in_use.insert(n.image);
  for (const auto& image_id : images_in_use) {
    const NodeImage& image = scenario.image(image_id);
    for (const auto& wf : scenario.workflows) {
      if (!used_workflows.count(wf.name)) continue;
      std::vector<std::string> hosted;
      for (const auto& s : wf.services) {
        auto it = image.pods.find(s);
        if (it != image.pods.end() && it->second > 0) hosted.push_back(s);
      }
      if (hosted.empty()) continue;
      const auto* curve = table.find(image.table_key(), wf.name);
      if (curve == nullptr || curve->empty()) {
        missing.push_back("(" + image.table_key() + ", " + wf.name + ")");
        continue;
      }
      for (const auto& s : hosted)
        if (curve->front().find(s) == nullptr)
          missing.push_back("(" + image.table_key() + ", " + wf.name + ", " + s + ")");
    }
  }
  if (!missing.empty()) {
    std::string msg = "cost table does not cover";
    for (const auto& m : missing) msg += " " + m;
    throw CoverageError(msg);
  }
}

inline Cluster build_cluster(const Scenario& scenario, const CostTable& table, const RunOverrides& overrides = {}) {
  EngineOptions options;
  options.autoscaler = scenario.options.autoscaler && !overrides.no_autoscaler;
  options.mix = overrides.mix.value_or(scenario.options.mix);
  options.fast_path = overrides.fast_path;
  Cluster cluster(table, options);
  for (const auto& n : scenario.nodes) cluster.add_node(n.id, scenario.image(n.image));
  cluster.set_placement_rules(scenario.placement_rules);
  for (const auto& s : scenario.services) cluster.add_service(s);
  for (const auto& c : scenario.clients) cluster.add_client(c);
  return cluster;
}

/// Runs the scenario. Coverage is checked before any simulation work.
inline RunResult run_scenario(const Scenario& scenario, const CostTable& table, const RunOverrides& overrides = {}) {
  check_coverage(scenario, table);
  const Tick ticks = overrides.ticks.value_or(scenario.duration_ticks);
  if (ticks <= 0) throw std::invalid_argument("run_scenario: tick count must be positive");
  Cluster cluster = build_cluster(scenario, table, overrides);
  cluster.run(ticks);

  RunResult r;
  r.name = scenario.name;
  r.ticks = ticks;
  r.options = cluster.options();
  r.series = cluster.series();
  r.events = cluster.events();
  r.accounting = cluster.accounting();
  r.unfinished = cluster.unfinished();
  r.summary = summarize(scenario.name, r.series);
  return r;
}

}  // namespace k8sim
