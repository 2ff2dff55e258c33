#include "../support/fixtures.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace k8sim;
using namespace k8sim::testing;

namespace {

Rational R(std::int64_t n, std::int64_t d = 1) { return make_rational(n, d); }

const WorkflowData kWf1{"workflow1", {"frontend", "currencyservice", "adservice", "cartservice",
                                      "productcatalogservice", "redis-cart"}};

NodeState node_state(std::uint32_t id, std::int64_t cpu = 4000, std::int64_t mem = 16000) {
  return NodeState(NodeId{id}, image("A", {{"frontend", 1}}, cpu, mem));
}

PodState pod_state(std::uint32_t id, const std::string& service = "frontend", std::int64_t request = 100) {
  PodState p;
  p.id = PodId{id};
  p.service = service;
  p.config = pod_config(request, 2000);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Clients

TEST(Client, EmitsOneBatchPerDelay) {
  auto s = client_emit_schedule(client(kWf1, 25, 80));
  ASSERT_EQ(s.size(), 80u);
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_EQ(emission_tick(s[k].time), static_cast<Tick>(k));
    EXPECT_EQ(s[k].request.rps, 25);
  }
  EXPECT_TRUE(client_emit_schedule(client(kWf1, 25, 0)).empty());

  auto spaced = client_emit_schedule(client(kWf1, 25, 3, 2.0, 1.0));
  ASSERT_EQ(spaced.size(), 3u);
  EXPECT_EQ(emission_tick(spaced[0].time), 1);
  EXPECT_EQ(emission_tick(spaced[1].time), 3);
  EXPECT_EQ(emission_tick(spaced[2].time), 5);
}

TEST(Client, FractionalDelaysLandOnTheRightTick) {
  auto s = client_emit_schedule(client(kWf1, 1, 31, 0.1));
  EXPECT_EQ(emission_tick(s[10].time), 1);
  EXPECT_EQ(emission_tick(s[30].time), 3);
  EXPECT_EQ(emission_tick(s[9].time), 0);
}

TEST(Client, SpecChecks) {
  EXPECT_FALSE(client(kWf1, 25, 10).check());
  EXPECT_TRUE(client(kWf1, 0, 10).check());
  EXPECT_TRUE(client(kWf1, 25, -1).check());
  EXPECT_TRUE(client(kWf1, 25, 1, 0.0).check());
  EXPECT_TRUE(client(kWf1, 25, 1, 1.0, -1.0).check());
}

// ---------------------------------------------------------------------------
// Round-robin split

TEST(RoundRobin, Examples) {
  EXPECT_EQ(split_round_robin(10, 4), (std::vector<std::int64_t>{3, 3, 2, 2}));
  EXPECT_EQ(split_round_robin(8, 4), (std::vector<std::int64_t>{2, 2, 2, 2}));
  EXPECT_EQ(split_round_robin(0, 3), (std::vector<std::int64_t>{0, 0, 0}));
  EXPECT_EQ(split_round_robin(2, 5), (std::vector<std::int64_t>{1, 1, 0, 0, 0}));
  EXPECT_THROW(split_round_robin(1, 0), std::invalid_argument);
  EXPECT_THROW(split_round_robin(-1, 2), std::invalid_argument);
}

TEST(RoundRobin, SumsExactlyAndQuotasDifferByAtMostOneProperty) {
  Gen g(31);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto total = g.integer(0, 100000);
    const auto n = static_cast<std::size_t>(g.integer(1, 64));
    auto q = split_round_robin(total, n);
    ASSERT_EQ(q.size(), n);
    ASSERT_EQ(std::accumulate(q.begin(), q.end(), std::int64_t{0}), total);
    auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    ASSERT_LE(*hi - *lo, 1);
    ASSERT_TRUE(std::is_sorted(q.rbegin(), q.rend()));
  }
}

TEST(RoundRobin, PodSlotOrderInterleavesNodes) {
  std::map<NodeId, int> pods{{NodeId{1}, 2}, {NodeId{2}, 1}, {NodeId{3}, 3}};
  auto slots = pod_slot_order(pods);
  std::vector<std::uint32_t> ids;
  for (auto n : slots) ids.push_back(n.value);
  EXPECT_EQ(ids, (std::vector<std::uint32_t>{1, 2, 3, 1, 3, 3}));
}

// ---------------------------------------------------------------------------
// Load balancer

TEST(LoadBalancer, SplitsEvenlyAcrossNodes) {
  LoadBalancer lb;
  WorkflowData wf{"wf", {"frontend"}};
  PodPlacement placement{{"frontend", {{NodeId{1}, 1}, {NodeId{2}, 1}}}};
  auto out = lb.balance({wf, 100}, placement);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (RoutedRequest{NodeId{1}, {"frontend", "wf", 50}}));
  EXPECT_EQ(out[1], (RoutedRequest{NodeId{2}, {"frontend", "wf", 50}}));
}

TEST(LoadBalancer, SinglePodTakesEverything) {
  LoadBalancer lb;
  WorkflowData wf{"wf", {"frontend"}};
  auto out = lb.balance({wf, 37}, {{"frontend", {{NodeId{3}, 1}}}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].node, NodeId{3});
  EXPECT_EQ(out[0].request.rps, 37);
}

TEST(LoadBalancer, FansOutToEveryServiceOfTheWorkflow) {
  LoadBalancer lb;
  PodPlacement placement;
  for (const auto& s : kWf1.services) placement[s][NodeId{1}] = 1;
  auto out = lb.balance({kWf1, 25}, placement);
  ASSERT_EQ(out.size(), 6u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].request.service, kWf1.services[i]);
    EXPECT_EQ(out[i].request.rps, 25);
  }
}

TEST(LoadBalancer, UnplacedServiceIsUnroutable) {
  LoadBalancer lb;
  WorkflowData wf{"wf", {"frontend", "ghost"}};
  EXPECT_THROW(lb.balance({wf, 10}, {{"frontend", {{NodeId{1}, 1}}}}), UnroutableService);
}

TEST(LoadBalancer, ConservesFlowAndStaysFairProperty) {
  Gen g(41);
  LoadBalancer lb;
  for (int trial = 0; trial < 2000; ++trial) {
    WorkflowData wf{"wf", {"a", "b"}};
    PodPlacement placement;
    std::map<std::string, std::map<NodeId, int>> pods;
    for (const auto& s : wf.services) {
      const int nodes = static_cast<int>(g.integer(1, 5));
      for (int n = 1; n <= nodes; ++n) {
        const int c = static_cast<int>(g.integer(0, 3));
        if (c > 0) placement[s][NodeId{static_cast<std::uint32_t>(n)}] = c;
      }
      if (placement[s].empty()) placement[s][NodeId{1}] = 1;
    }
    const auto rps = g.integer(0, 1000);
    auto out = lb.balance({wf, rps}, placement);
    for (const auto& s : wf.services) {
      std::int64_t sum = 0;
      int total_pods = 0;
      for (const auto& [node, c] : placement[s]) total_pods += c;
      for (const auto& r : out) {
        if (r.request.service != s) continue;
        sum += r.request.rps;
        // Each node's share is its pod count times the per-pod quota, up to one extra per pod.
        const int c = placement[s].at(r.node);
        ASSERT_GE(r.request.rps, c * (rps / total_pods));
        ASSERT_LE(r.request.rps, c * (rps / total_pods + 1));
      }
      ASSERT_EQ(sum, rps) << "trial " << trial;
    }
  }
}

// ---------------------------------------------------------------------------
// Scheduler

TEST(Scheduler, RuleListCyclesAcrossNodes) {
  std::vector<NodeState> nodes;
  for (std::uint32_t i = 1; i <= 4; ++i) nodes.push_back(node_state(i));
  Scheduler s(PlacementRules{{"frontend", {NodeId{1}, NodeId{2}, NodeId{3}, NodeId{4}}}});
  std::map<std::uint32_t, int> counts;
  for (std::uint32_t p = 0; p < 10; ++p) {
    auto target = s.deploy_pod(pod_state(p), nodes);
    ASSERT_TRUE(target);
    ++counts[target->value];
  }
  EXPECT_EQ(counts, (std::map<std::uint32_t, int>{{1, 3}, {2, 3}, {3, 2}, {4, 2}}));
  EXPECT_EQ(nodes[0].reserved_cpu, 300);
}

TEST(Scheduler, FullRuleTargetLeavesThePodPending) {
  std::vector<NodeState> nodes{node_state(1, 250), node_state(2)};
  Scheduler s(PlacementRules{{"frontend", {NodeId{1}, NodeId{2}}}});
  ASSERT_EQ(*s.deploy_pod(pod_state(0, "frontend", 200), nodes), NodeId{1});
  // Node 1 is next again only after node 2.
  ASSERT_EQ(*s.deploy_pod(pod_state(1, "frontend", 200), nodes), NodeId{2});
  EXPECT_FALSE(s.deploy_pod(pod_state(2, "frontend", 200), nodes));
  nodes[0].reserved_cpu = 0;
  EXPECT_EQ(*s.deploy_pod(pod_state(2, "frontend", 200), nodes), NodeId{1});
}

TEST(Scheduler, WithoutRulesPicksMaxFreeCpu) {
  std::vector<NodeState> nodes{node_state(1), node_state(2), node_state(3)};
  nodes[0].reserved_cpu = 1000;
  nodes[2].reserved_cpu = 500;
  Scheduler s;
  EXPECT_EQ(*s.deploy_pod(pod_state(0), nodes), NodeId{2});
  nodes[1].reserved_cpu = 500;
  EXPECT_EQ(*s.deploy_pod(pod_state(1), nodes), NodeId{2});  // 3500 free on nodes 2 and 3, lowest id wins
  EXPECT_EQ(*s.deploy_pod(pod_state(2), nodes), NodeId{3});
}

TEST(Scheduler, NoFittingNodeMeansPending) {
  std::vector<NodeState> nodes{node_state(1, 300)};
  Scheduler s;
  EXPECT_FALSE(s.deploy_pod(pod_state(0, "frontend", 400), nodes));
  EXPECT_EQ(nodes[0].reserved_cpu, 0);
}

TEST(Scheduler, MaxFreeChoiceProperty) {
  Gen g(51);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<NodeState> nodes;
    const int n = static_cast<int>(g.integer(1, 8));
    for (int i = 1; i <= n; ++i) {
      const auto cap = g.integer(1000, 8000);
      nodes.push_back(node_state(static_cast<std::uint32_t>(i), cap));
      nodes.back().reserved_cpu = g.integer(0, cap);
    }
    const auto request = g.integer(1, 3000);
    // Oracle: largest unreserved CPU, lowest id on ties.
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (!best || nodes[i].unreserved_cpu() > nodes[*best].unreserved_cpu()) best = i;
    const bool fits = nodes[*best].unreserved_cpu() >= request;
    const Millicores before = nodes[*best].reserved_cpu;

    Scheduler s;
    auto got = s.deploy_pod(pod_state(0, "svc", request), nodes);
    if (!fits) {
      ASSERT_FALSE(got) << "trial " << trial;
      continue;
    }
    ASSERT_TRUE(got) << "trial " << trial;
    ASSERT_EQ(*got, nodes[*best].id) << "trial " << trial;
    ASSERT_EQ(nodes[*best].reserved_cpu, before + request);
  }
}

// ---------------------------------------------------------------------------
// Autoscaler

TEST(Autoscaler, ThresholdRule) {
  auto cfg = service("svc", 2).service;
  cfg.min_pods = 1;
  cfg.max_pods = 4;
  cfg.upscale_threshold = 0.8;
  cfg.downscale_threshold = 0.3;
  cfg.downscale_period = 2;
  ScalerState st;
  std::vector<double> hot{0.9, 0.95}, warm{0.5, 0.5}, cold{0.1, 0.2};

  EXPECT_EQ(autoscale_cycle(cfg, hot, 2, st), ScaleDecision::ScaleUp);
  EXPECT_EQ(autoscale_cycle(cfg, hot, 4, st), ScaleDecision::Hold);
  EXPECT_EQ(autoscale_cycle(cfg, warm, 2, st), ScaleDecision::Hold);
  EXPECT_EQ(autoscale_cycle(cfg, cold, 2, st), ScaleDecision::Hold);
  EXPECT_EQ(autoscale_cycle(cfg, cold, 2, st), ScaleDecision::ScaleDown);
  EXPECT_EQ(st.below_cycles, 0);
  // A warm cycle resets the streak.
  EXPECT_EQ(autoscale_cycle(cfg, cold, 2, st), ScaleDecision::Hold);
  EXPECT_EQ(autoscale_cycle(cfg, warm, 2, st), ScaleDecision::Hold);
  EXPECT_EQ(autoscale_cycle(cfg, cold, 2, st), ScaleDecision::Hold);
  // Never below min_pods.
  EXPECT_EQ(autoscale_cycle(cfg, cold, 1, st), ScaleDecision::Hold);
  EXPECT_EQ(autoscale_cycle(cfg, {}, 2, st), ScaleDecision::Hold);
}

TEST(Autoscaler, StaysWithinBoundsProperty) {
  Gen g(61);
  auto cfg = service("svc", 3).service;
  cfg.min_pods = 1;
  cfg.max_pods = 6;
  cfg.downscale_period = 1;
  ScalerState st;
  int pods = 3;
  for (int step = 0; step < 5000; ++step) {
    std::vector<double> u(static_cast<std::size_t>(pods));
    for (auto& x : u) x = g.real(0, 1.2);
    auto d = autoscale_cycle(cfg, u, pods, st);
    if (d == ScaleDecision::ScaleUp) ++pods;
    if (d == ScaleDecision::ScaleDown) --pods;
    ASSERT_GE(pods, cfg.min_pods);
    ASSERT_LE(pods, cfg.max_pods);
  }
}

TEST(Autoscaler, VictimHasFewestRequestsThenHighestId) {
  PodState a = pod_state(1), b = pod_state(2), c = pod_state(3);
  a.active.resize(1);
  c.active.resize(2);
  std::vector<const PodState*> pods{&a, &b, &c};
  EXPECT_EQ(*pick_downscale_victim(pods), PodId{2});
  b.active.resize(1);
  EXPECT_EQ(*pick_downscale_victim(pods), PodId{2});
  EXPECT_FALSE(pick_downscale_victim({}));
}

// ---------------------------------------------------------------------------
// Node state

TEST(NodeState, CpuGrantIsAllOrNothing) {
  NodeState n = node_state(1, 1000);
  PodState p = pod_state(0);
  p.host = n.id;
  EXPECT_EQ(consume_cpu(n, 600, p), CpuGrant::Granted);
  EXPECT_EQ(consume_cpu(n, 500, p), CpuGrant::Deferred);
  EXPECT_EQ(n.cpu_budget, 400);
  EXPECT_EQ(consume_cpu(n, 400, p), CpuGrant::Granted);
  EXPECT_EQ(n.cpu_budget, 0);
  EXPECT_THROW(consume_cpu(n, -1, p), std::invalid_argument);
  PodState stranger = pod_state(1);
  stranger.host = NodeId{9};
  EXPECT_THROW(consume_cpu(n, 0, stranger), std::logic_error);
}

TEST(NodeState, MemoryQueueIsFifo) {
  NodeState n = node_state(1, 4000, 100);
  EXPECT_EQ(allocate_memory(n, {PodId{0}, 1, 60, 0}), MemoryGrant::Allocated);
  EXPECT_EQ(allocate_memory(n, {PodId{0}, 2, 50, 0}), MemoryGrant::Pending);
  // Fits, but waits behind the queued allocation.
  EXPECT_EQ(allocate_memory(n, {PodId{1}, 3, 10, 0}), MemoryGrant::Pending);
  EXPECT_EQ(allocate_memory(n, {PodId{1}, 4, 0, 0}), MemoryGrant::Allocated);
  EXPECT_EQ(n.free_mem, 40);

  auto granted = release_memory(n, 60);
  ASSERT_EQ(granted.size(), 2u);
  EXPECT_EQ(granted[0].request, 2u);
  EXPECT_EQ(granted[1].request, 3u);
  EXPECT_EQ(n.free_mem, 40);
  EXPECT_THROW(release_memory(n, 61), ReleaseOverflow);
}

TEST(NodeState, CancelledWaitUnblocksTheQueue) {
  NodeState n = node_state(1, 4000, 100);
  allocate_memory(n, {PodId{0}, 1, 90, 0});
  allocate_memory(n, {PodId{0}, 2, 50, 0});
  allocate_memory(n, {PodId{1}, 3, 10, 0});
  EXPECT_TRUE(cancel_memory_wait(n, PodId{0}, 2));
  EXPECT_FALSE(cancel_memory_wait(n, PodId{0}, 2));
  auto granted = retry_pending_memory(n);
  ASSERT_EQ(granted.size(), 1u);
  EXPECT_EQ(granted[0].request, 3u);
  EXPECT_EQ(n.free_mem, 0);
}

TEST(NodeState, ConvertSplitsRpsAcrossLocalPods) {
  NodeState n(NodeId{1}, image("A", {{"frontend", 2}}));
  std::vector<NodeRequest> queued{{"frontend", "workflow1", 25}};
  std::map<std::string, std::vector<PodId>> local{{"frontend", {PodId{4}, PodId{7}}}};
  auto c = node_convert_rps(n, queued, calibrated_a25_table(), local);
  ASSERT_EQ(c.assignments.size(), 2u);
  // 526 millicores for 25 requests, quotas 13 and 12.
  const Rational per_request = R(526, 25);
  EXPECT_EQ(c.assignments[0].pod, PodId{4});
  EXPECT_EQ(c.assignments[0].request.rps_quota, 13);
  EXPECT_EQ(c.assignments[0].request.cost, per_request * 13);
  EXPECT_EQ(c.assignments[1].request.cost, per_request * 12);
  EXPECT_EQ(to_exact_string(c.assignments[0].request.cost), "273.52");
  EXPECT_EQ(to_exact_string(c.assignments[1].request.cost), "252.48");

  std::map<std::string, std::vector<PodId>> none;
  EXPECT_THROW(node_convert_rps(n, queued, calibrated_a25_table(), none), OrphanService);
  EXPECT_TRUE(node_convert_rps(n, {}, calibrated_a25_table(), none).assignments.empty());
}

// ---------------------------------------------------------------------------
// Memory cool-down

namespace {

struct Blocked {
  NodeState node = node_state(1, 4000, 100);
  PodState pod = pod_state(0);

  explicit Blocked(Tick cooldown) {
    pod.config.memory_cooldown = cooldown;
    pod.host = node.id;
    node.hosted_pods.push_back(pod.id);
    node.reserved_cpu = pod.config.cpu_request;
    ActiveRequest held;
    held.id = 1;
    held.request.memory = 80;
    held.mem_allocated = true;
    allocate_memory(node, {pod.id, 1, 80, 0});
    ActiveRequest waiting;
    waiting.id = 2;
    waiting.request.memory = 50;
    waiting.pending_since = 0;
    allocate_memory(node, {pod.id, 2, 50, 0});
    pod.active = {held, waiting};
  }
};

}  // namespace

TEST(MemoryCooldown, WaitsForTheCooldown) {
  Blocked b(5);
  EXPECT_FALSE(memory_cooldown_reschedule(b.pod, b.node, 3));
  EXPECT_TRUE(b.pod.host);
  auto ev = memory_cooldown_reschedule(b.pod, b.node, 5);
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->waited, 5);
  EXPECT_FALSE(b.pod.host);
  EXPECT_TRUE(b.node.hosted_pods.empty());
  EXPECT_TRUE(b.node.pending_mem.empty());
  EXPECT_EQ(b.node.free_mem, 100);
  EXPECT_EQ(b.node.reserved_cpu, 0);
}

TEST(MemoryCooldown, ZeroCooldownDetachesImmediately) {
  Blocked b(0);
  EXPECT_TRUE(memory_cooldown_reschedule(b.pod, b.node, 0));
}

TEST(MemoryCooldown, NothingWaitingMeansNoReschedule) {
  Blocked b(0);
  b.pod.active.pop_back();
  cancel_memory_wait(b.node, b.pod.id, 2);
  EXPECT_FALSE(memory_cooldown_reschedule(b.pod, b.node, 100));
}
