#pragma once

#include <k8sim/control/scheduler.hpp>
#include <k8sim/errors.hpp>
#include <k8sim/io/csv.hpp>
#include <k8sim/model/consumption.hpp>
#include <k8sim/model/types.hpp>
#include <k8sim/traffic/client.hpp>
#include <k8sim/traffic/load_balancer.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace k8sim {

inline constexpr int kScenarioFormatVersion = 1;

struct NodeSpec {
  NodeId id;
  std::string image;

  bool operator==(const NodeSpec&) const = default;
};

struct ScenarioOptions {
  bool autoscaler = false;
  WorkflowMix mix = WorkflowMix::Share;
  // Reserved for stochastic balancing policies; round-robin ignores it.
  std::uint64_t seed = 0;
  BalancingPolicy load_balancer = BalancingPolicy::RoundRobin;

  bool operator==(const ScenarioOptions&) const = default;
};

/// A complete experiment: node fleet, services, placement, workload, duration.
struct Scenario {
  std::string name;
  std::string description;
  Tick duration_ticks = 0;
  std::vector<NodeImage> images;
  std::vector<NodeSpec> nodes;
  std::vector<WorkflowData> workflows;
  std::vector<ServiceSpec> services;
  PlacementRules placement_rules;
  std::vector<ClientSpec> clients;
  ScenarioOptions options;

  bool operator==(const Scenario&) const = default;

  const NodeImage& image(const std::string& id) const {
    for (const auto& i : images)
      if (i.id == id) return i;
    throw SchemaError("unknown image '" + id + "'");
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace scenario_json {

using nlohmann::json;

class Reader {
 public:
  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
  }

  static void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) fail(path + "." + key, "unknown key");
    }
  }

  static const json& required(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required key");
    return *it;
  }

  static std::string string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  static std::int64_t integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }

  static double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  static bool boolean(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected a boolean");
    return v.get<bool>();
  }

  // Exact quantity: an integer, a decimal number, or a "p/q" string.
  static Rational rational(const json& v, const std::string& path) {
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    std::string text;
    if (v.is_number_float())
      text = v.dump();
    else if (v.is_string())
      text = v.get<std::string>();
    else
      fail(path, "expected a number");
    auto r = parse_rational(text);
    if (!r) fail(path, "not an exact decimal or fraction: '" + text + "'");
    return *r;
  }

  static const json& array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }
};

inline json rational_json(const Rational& r) {
  if (boost::multiprecision::denominator(r) == 1) return json(boost::multiprecision::numerator(r).convert_to<std::int64_t>());
  return json(to_exact_string(r));
}

}  // namespace scenario_json

/// Parses and resolves a scenario document. Unknown keys are rejected; every
/// cross reference must resolve.
inline Scenario parse_scenario_json(const nlohmann::json& doc) {
  using R = scenario_json::Reader;
  R::only_keys(doc, "$",
               {"format_version", "name", "description", "duration_ticks", "images", "nodes", "workflows", "services",
                "placement_rules", "clients", "options"});

  Scenario s;
  if (R::integer(R::required(doc, "$", "format_version"), "$.format_version") != kScenarioFormatVersion)
    R::fail("$.format_version", "unsupported version");
  s.name = R::string(R::required(doc, "$", "name"), "$.name");
  if (doc.contains("description")) s.description = R::string(doc["description"], "$.description");
  s.duration_ticks = R::integer(R::required(doc, "$", "duration_ticks"), "$.duration_ticks");
  if (s.duration_ticks <= 0) R::fail("$.duration_ticks", "must be positive");

  const auto& images = R::array(R::required(doc, "$", "images"), "$.images");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string p = "$.images[" + std::to_string(i) + "]";
    const auto& j = images[i];
    R::only_keys(j, p, {"id", "cpu_capacity", "mem_capacity", "pods", "cost_table_image"});
    NodeImage img;
    img.id = R::string(R::required(j, p, "id"), p + ".id");
    img.cpu_capacity = R::rational(R::required(j, p, "cpu_capacity"), p + ".cpu_capacity");
    img.mem_capacity = R::rational(R::required(j, p, "mem_capacity"), p + ".mem_capacity");
    const auto& pods = R::required(j, p, "pods");
    if (!pods.is_object()) R::fail(p + ".pods", "expected an object");
    for (const auto& [service, count] : pods.items())
      img.pods[service] = static_cast<int>(R::integer(count, p + ".pods." + service));
    if (j.contains("cost_table_image")) img.cost_table_image = R::string(j["cost_table_image"], p + ".cost_table_image");
    if (auto err = img.check()) R::fail(p, *err);
    for (const auto& other : s.images)
      if (other.id == img.id) R::fail(p + ".id", "duplicate image id '" + img.id + "'");
    s.images.push_back(std::move(img));
  }

  const auto& nodes = R::array(R::required(doc, "$", "nodes"), "$.nodes");
  if (nodes.empty()) R::fail("$.nodes", "at least one node is required");
  std::set<NodeId> node_ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = "$.nodes[" + std::to_string(i) + "]";
    R::only_keys(nodes[i], p, {"id", "image"});
    auto id = R::integer(R::required(nodes[i], p, "id"), p + ".id");
    if (id < 0 || id > UINT32_MAX) R::fail(p + ".id", "out of range");
    NodeSpec n{NodeId{static_cast<std::uint32_t>(id)}, R::string(R::required(nodes[i], p, "image"), p + ".image")};
    bool known = false;
    for (const auto& img : s.images) known = known || img.id == n.image;
    if (!known) R::fail(p + ".image", "unknown image '" + n.image + "'");
    if (!node_ids.insert(n.id).second) R::fail(p + ".id", "duplicate node id");
    s.nodes.push_back(std::move(n));
  }

  const auto& services = R::array(R::required(doc, "$", "services"), "$.services");
  std::set<std::string> service_names;
  for (std::size_t i = 0; i < services.size(); ++i) {
    const std::string p = "$.services[" + std::to_string(i) + "]";
    const auto& j = services[i];
    R::only_keys(j, p,
                 {"name", "starting_pods", "min_pods", "max_pods", "scaler_cycle", "upscale_threshold",
                  "downscale_threshold", "downscale_period", "pod"});
    ServiceSpec spec;
    auto& sc = spec.service;
    sc.name = R::string(R::required(j, p, "name"), p + ".name");
    sc.starting_pods = static_cast<int>(R::integer(R::required(j, p, "starting_pods"), p + ".starting_pods"));
    sc.min_pods = j.contains("min_pods") ? static_cast<int>(R::integer(j["min_pods"], p + ".min_pods")) : sc.starting_pods;
    sc.max_pods = j.contains("max_pods") ? static_cast<int>(R::integer(j["max_pods"], p + ".max_pods")) : sc.starting_pods;
    if (j.contains("scaler_cycle")) sc.scaler_cycle = R::integer(j["scaler_cycle"], p + ".scaler_cycle");
    if (j.contains("upscale_threshold")) sc.upscale_threshold = R::number(j["upscale_threshold"], p + ".upscale_threshold");
    if (j.contains("downscale_threshold"))
      sc.downscale_threshold = R::number(j["downscale_threshold"], p + ".downscale_threshold");
    if (j.contains("downscale_period"))
      sc.downscale_period = static_cast<int>(R::integer(j["downscale_period"], p + ".downscale_period"));
    if (auto err = sc.check()) R::fail(p, *err);

    const std::string pp = p + ".pod";
    const auto& pod = R::required(j, p, "pod");
    R::only_keys(pod, pp, {"monitor_cycle", "memory_cooldown", "cpu_request", "cpu_limit", "cost_granularity"});
    auto& pc = spec.pod;
    if (pod.contains("monitor_cycle")) pc.monitor_cycle = R::integer(pod["monitor_cycle"], pp + ".monitor_cycle");
    if (pod.contains("memory_cooldown")) pc.memory_cooldown = R::integer(pod["memory_cooldown"], pp + ".memory_cooldown");
    pc.cpu_request = R::rational(R::required(pod, pp, "cpu_request"), pp + ".cpu_request");
    pc.cpu_limit = R::rational(R::required(pod, pp, "cpu_limit"), pp + ".cpu_limit");
    if (pod.contains("cost_granularity"))
      pc.cost_granularity = static_cast<int>(R::integer(pod["cost_granularity"], pp + ".cost_granularity"));
    if (auto err = pc.check()) R::fail(pp, *err);

    if (!service_names.insert(sc.name).second) R::fail(p + ".name", "duplicate service '" + sc.name + "'");
    s.services.push_back(std::move(spec));
  }

  for (std::size_t i = 0; i < s.images.size(); ++i)
    for (const auto& [service, count] : s.images[i].pods)
      if (!service_names.count(service))
        R::fail("$.images[" + std::to_string(i) + "].pods." + service, "unknown service '" + service + "'");

  const auto& workflows = R::array(R::required(doc, "$", "workflows"), "$.workflows");
  for (std::size_t i = 0; i < workflows.size(); ++i) {
    const std::string p = "$.workflows[" + std::to_string(i) + "]";
    R::only_keys(workflows[i], p, {"name", "services"});
    WorkflowData wf;
    wf.name = R::string(R::required(workflows[i], p, "name"), p + ".name");
    const auto& list = R::array(R::required(workflows[i], p, "services"), p + ".services");
    for (std::size_t k = 0; k < list.size(); ++k) {
      auto name = R::string(list[k], p + ".services[" + std::to_string(k) + "]");
      if (!service_names.count(name))
        R::fail(p + ".services[" + std::to_string(k) + "]", "unknown service '" + name + "'");
      wf.services.push_back(std::move(name));
    }
    if (auto err = wf.check()) R::fail(p, *err);
    for (const auto& other : s.workflows)
      if (other.name == wf.name) R::fail(p + ".name", "duplicate workflow '" + wf.name + "'");
    s.workflows.push_back(std::move(wf));
  }

  if (doc.contains("placement_rules")) {
    const auto& rules = doc["placement_rules"];
    if (!rules.is_object()) R::fail("$.placement_rules", "expected an object");
    for (const auto& [service, list] : rules.items()) {
      const std::string p = "$.placement_rules." + service;
      if (!service_names.count(service)) R::fail(p, "unknown service '" + service + "'");
      R::array(list, p);
      if (list.empty()) R::fail(p, "rule list is empty");
      std::vector<NodeId> ids;
      for (std::size_t k = 0; k < list.size(); ++k) {
        auto id = R::integer(list[k], p + "[" + std::to_string(k) + "]");
        NodeId n{static_cast<std::uint32_t>(id)};
        if (id < 0 || !node_ids.count(n)) R::fail(p + "[" + std::to_string(k) + "]", "unknown node " + std::to_string(id));
        ids.push_back(n);
      }
      s.placement_rules[service] = std::move(ids);
    }
  }

  const auto& clients = R::array(R::required(doc, "$", "clients"), "$.clients");
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const std::string p = "$.clients[" + std::to_string(i) + "]";
    const auto& j = clients[i];
    R::only_keys(j, p, {"workflow", "rps", "num_batches", "delay", "start_time"});
    ClientSpec c;
    auto wf_name = R::string(R::required(j, p, "workflow"), p + ".workflow");
    const WorkflowData* wf = nullptr;
    for (const auto& w : s.workflows)
      if (w.name == wf_name) wf = &w;
    if (wf == nullptr) R::fail(p + ".workflow", "unknown workflow '" + wf_name + "'");
    c.request.workflow = *wf;
    c.request.rps = R::integer(R::required(j, p, "rps"), p + ".rps");
    c.num_batches = R::integer(R::required(j, p, "num_batches"), p + ".num_batches");
    if (j.contains("delay")) c.delay = R::number(j["delay"], p + ".delay");
    if (j.contains("start_time")) c.start_time = R::number(j["start_time"], p + ".start_time");
    if (auto err = c.check()) R::fail(p, *err);
    s.clients.push_back(std::move(c));
  }

  if (doc.contains("options")) {
    const auto& o = doc["options"];
    R::only_keys(o, "$.options", {"autoscaler", "wf_mix", "seed", "load_balancer"});
    if (o.contains("autoscaler")) s.options.autoscaler = R::boolean(o["autoscaler"], "$.options.autoscaler");
    if (o.contains("wf_mix")) {
      auto mix = R::string(o["wf_mix"], "$.options.wf_mix");
      if (mix == "share")
        s.options.mix = WorkflowMix::Share;
      else if (mix == "additive")
        s.options.mix = WorkflowMix::Additive;
      else
        R::fail("$.options.wf_mix", "expected 'share' or 'additive'");
    }
    if (o.contains("seed")) {
      auto seed = R::integer(o["seed"], "$.options.seed");
      if (seed < 0) R::fail("$.options.seed", "must be non-negative");
      s.options.seed = static_cast<std::uint64_t>(seed);
    }
    if (o.contains("load_balancer")) {
      auto lb = R::string(o["load_balancer"], "$.options.load_balancer");
      if (lb != "round_robin") R::fail("$.options.load_balancer", "policy '" + lb + "' is not available");
    }
  }
  return s;
}

inline Scenario parse_scenario_text(const std::string& text, const std::string& source = "<scenario>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(source + ": invalid JSON: " + e.what());
  }
  return parse_scenario_json(doc);
}

inline Scenario parse_scenario(const std::filesystem::path& path) {
  return parse_scenario_text(csv::read_file(path), path.string());
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  using scenario_json::rational_json;
  json doc = json::object();
  doc["format_version"] = kScenarioFormatVersion;
  doc["name"] = s.name;
  if (!s.description.empty()) doc["description"] = s.description;
  doc["duration_ticks"] = s.duration_ticks;

  doc["images"] = json::array();
  for (const auto& img : s.images) {
    json j{{"id", img.id}, {"cpu_capacity", rational_json(img.cpu_capacity)},
           {"mem_capacity", rational_json(img.mem_capacity)}, {"pods", json::object()}};
    for (const auto& [service, count] : img.pods) j["pods"][service] = count;
    if (!img.cost_table_image.empty()) j["cost_table_image"] = img.cost_table_image;
    doc["images"].push_back(std::move(j));
  }
  doc["nodes"] = json::array();
  for (const auto& n : s.nodes) doc["nodes"].push_back({{"id", n.id.value}, {"image", n.image}});
  doc["workflows"] = json::array();
  for (const auto& wf : s.workflows) doc["workflows"].push_back({{"name", wf.name}, {"services", wf.services}});
  doc["services"] = json::array();
  for (const auto& spec : s.services) {
    const auto& sc = spec.service;
    const auto& pc = spec.pod;
    doc["services"].push_back({{"name", sc.name},
                               {"starting_pods", sc.starting_pods},
                               {"min_pods", sc.min_pods},
                               {"max_pods", sc.max_pods},
                               {"scaler_cycle", sc.scaler_cycle},
                               {"upscale_threshold", sc.upscale_threshold},
                               {"downscale_threshold", sc.downscale_threshold},
                               {"downscale_period", sc.downscale_period},
                               {"pod",
                                {{"monitor_cycle", pc.monitor_cycle},
                                 {"memory_cooldown", pc.memory_cooldown},
                                 {"cpu_request", rational_json(pc.cpu_request)},
                                 {"cpu_limit", rational_json(pc.cpu_limit)},
                                 {"cost_granularity", pc.cost_granularity}}}});
  }
  if (!s.placement_rules.empty()) {
    doc["placement_rules"] = json::object();
    for (const auto& [service, ids] : s.placement_rules) {
      json list = json::array();
      for (NodeId id : ids) list.push_back(id.value);
      doc["placement_rules"][service] = std::move(list);
    }
  }
  doc["clients"] = json::array();
  for (const auto& c : s.clients)
    doc["clients"].push_back({{"workflow", c.request.workflow.name},
                              {"rps", c.request.rps},
                              {"num_batches", c.num_batches},
                              {"delay", c.delay},
                              {"start_time", c.start_time}});
  doc["options"] = {{"autoscaler", s.options.autoscaler},
                    {"wf_mix", to_string(s.options.mix)},
                    {"seed", s.options.seed},
                    {"load_balancer", to_string(s.options.load_balancer)}};
  return doc;
}

inline std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

}  // namespace k8sim
