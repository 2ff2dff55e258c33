#pragma once

#include <k8sim/k8sim.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace k8sim::testing {

/// Seeded generator for property suites; every failure message carries the seed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

 private:
  std::mt19937_64 rng_;
};

inline PodConfig pod_config(std::int64_t request = 100, std::int64_t limit = 2000, int granularity = 1,
                            Tick monitor_cycle = 1, Tick cooldown = 0) {
  PodConfig c;
  c.cpu_request = request;
  c.cpu_limit = limit;
  c.cost_granularity = granularity;
  c.monitor_cycle = monitor_cycle;
  c.memory_cooldown = cooldown;
  return c;
}

inline ServiceSpec service(const std::string& name, int pods, PodConfig pod = pod_config()) {
  ServiceSpec s;
  s.service.name = name;
  s.service.starting_pods = s.service.min_pods = s.service.max_pods = pods;
  s.pod = pod;
  return s;
}

inline NodeImage image(const std::string& id, std::map<std::string, int> pods, std::int64_t cpu = 4000,
                       std::int64_t mem = 16000) {
  NodeImage i;
  i.id = id;
  i.cpu_capacity = cpu;
  i.mem_capacity = mem;
  i.pods = std::move(pods);
  return i;
}

inline ClientSpec client(const WorkflowData& wf, std::int64_t rps, std::int64_t batches, double delay = 1.0,
                         double start = 0.0) {
  ClientSpec c;
  c.request = {wf, rps};
  c.num_batches = batches;
  c.delay = delay;
  c.start_time = start;
  return c;
}

/// The 25 RPS calibration knots for image A.
inline CostTable calibrated_a25_table() {
  CostTable t;
  auto add = [&](const char* wf, std::initializer_list<std::pair<const char*, int>> rows) {
    for (const auto& [service, cpu] : rows) t.add("A", wf, 25, service, ServiceCost{cpu, std::nullopt});
  };
  add("workflow1", {{"frontend", 526}, {"currencyservice", 434}, {"adservice", 72}, {"cartservice", 72},
                    {"productcatalogservice", 57}, {"redis-cart", 12}});
  add("workflow2", {{"frontend", 558}, {"currencyservice", 436}, {"adservice", 72}, {"cartservice", 73},
                    {"productcatalogservice", 57}, {"redis-cart", 12}});
  add("workflow3", {{"frontend", 467}, {"currencyservice", 114}, {"adservice", 73}, {"cartservice", 73},
                    {"productcatalogservice", 276}, {"recommendationservice", 135}, {"redis-cart", 12}});
  return t;
}

inline std::string scenario_dir() { return K8SIM_SCENARIO_DIR; }

inline Scenario bundled(const std::string& name) { return parse_scenario(scenario_dir() + "/" + name + ".json"); }

inline const CostTable& boutique_table() {
  static const CostTable table = parse_cost_table(scenario_dir() + "/cost_tables/boutique.csv");
  return table;
}

inline const std::vector<std::string>& bundled_names() {
  static const std::vector<std::string> names{
      "profile-P1",   "profile-P2",   "profile-P3",   "profile-P4",       "profile-T1",
      "profile-T2",   "profile-T3",   "profile-T4",   "mix-1B3C",     "mix-2B2C",
      "mix-3B1C", "single-a-wf1-25", "autoscale-demo"};
  return names;
}

/// Steps a cluster for `ticks`, checking engine invariants after every tick.
inline void run_checked(Cluster& c, Tick ticks) {
  for (Tick t = 0; t < ticks; ++t) {
    c.tick();
    c.check_invariants();
  }
}

}  // namespace k8sim::testing
