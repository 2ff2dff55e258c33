#pragma once

#include <k8sim/errors.hpp>
#include <k8sim/model/types.hpp>
#include <k8sim/rational.hpp>

#include <algorithm>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace k8sim {

enum class EntityKind { Pod, Node, Service };

inline const char* to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Pod: return "pod";
    case EntityKind::Node: return "node";
    case EntityKind::Service: return "service";
  }
  return "?";
}

struct EntityKey {
  EntityKind kind = EntityKind::Pod;
  std::string id;

  auto operator<=>(const EntityKey&) const = default;
  bool operator==(const EntityKey&) const = default;
};

struct MetricSample {
  Tick time = 0;
  EntityKey entity;
  // Service the entity belongs to (pods and services); empty for nodes.
  std::string service;
  Millicores cpu = 0;
  MegaBytes mem = 0;
};

struct EntitySeries {
  std::string service;
  std::vector<Millicores> cpu;
  std::vector<MegaBytes> mem;
};

/// Time-indexed CPU and memory per entity. Every entity has one sample per
/// recorded tick; entities first seen late are back-filled with zeros and
/// entities missing from a tick get a zero sample.
class ConsumptionSeries {
 public:
  void record_tick(Tick time, const std::vector<MetricSample>& samples) {
    if (time < length_) throw DuplicateSample("tick " + std::to_string(time) + " already recorded");
    // Validate everything before touching the series.
    std::vector<const MetricSample*> fresh;
    std::vector<EntitySeries*> known;
    std::vector<EntitySeries*> slot(samples.size(), nullptr);
    known.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (s.time != time) throw std::invalid_argument("record_tick: sample time differs from tick");
      if (s.cpu < 0 || s.mem < 0) throw std::invalid_argument("record_tick: negative sample");
      auto it = series_.find(s.entity);
      if (it == series_.end())
        fresh.push_back(&s);
      else
        known.push_back(slot[i] = &it->second);
    }
    auto duplicate = [&](const EntityKey& key) {
      return DuplicateSample(std::string(to_string(key.kind)) + " '" + key.id + "' at t=" + std::to_string(time));
    };
    {
      std::vector<EntitySeries*> sorted = known;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        for (const auto& s : samples)
          for (const auto& t : samples)
            if (&s != &t && s.entity == t.entity) throw duplicate(s.entity);
      }
      std::sort(fresh.begin(), fresh.end(), [](const MetricSample* a, const MetricSample* b) { return a->entity < b->entity; });
      for (std::size_t i = 1; i < fresh.size(); ++i)
        if (fresh[i]->entity == fresh[i - 1]->entity) throw duplicate(fresh[i]->entity);
    }

    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      auto& e = slot[i] ? *slot[i] : series_[s.entity];
      if (e.service.empty()) e.service = s.service;
      pad(e, time);
      e.cpu.push_back(s.cpu);
      e.mem.push_back(s.mem);
    }
    length_ = time + 1;
    for (auto& [key, e] : series_) pad(e, length_);
  }

  Tick length() const { return length_; }

  const std::map<EntityKey, EntitySeries>& entities() const { return series_; }

  const EntitySeries* find(const EntityKey& key) const {
    auto it = series_.find(key);
    return it == series_.end() ? nullptr : &it->second;
  }

  bool operator==(const ConsumptionSeries& other) const {
    if (length_ != other.length_ || series_.size() != other.series_.size()) return false;
    auto a = series_.begin();
    auto b = other.series_.begin();
    for (; a != series_.end(); ++a, ++b) {
      if (a->first != b->first || a->second.service != b->second.service || a->second.cpu != b->second.cpu ||
          a->second.mem != b->second.mem)
        return false;
    }
    return true;
  }

 private:
  static void pad(EntitySeries& e, Tick length) {
    while (static_cast<Tick>(e.cpu.size()) < length) {
      e.cpu.emplace_back(0);
      e.mem.emplace_back(0);
    }
  }

  std::map<EntityKey, EntitySeries> series_;
  Tick length_ = 0;
};

// ---------------------------------------------------------------------------
// Aggregation

/// Half-open tick range [begin, end).
struct Window {
  Tick begin = 0;
  Tick end = 0;

  Tick size() const { return end - begin; }
  bool operator==(const Window&) const = default;
};

/// Steady-state window: drops the first and last 5% of ticks (rounded down).
inline Window trimmed_window(Tick length) {
  const Tick trim = length * 5 / 100;
  return {trim, length - trim};
}

enum class GroupBy { Pod, Node, Service };

struct Average {
  Millicores cpu = 0;
  MegaBytes mem = 0;

  bool operator==(const Average&) const = default;
};

inline EntityKind kind_of(GroupBy g) {
  switch (g) {
    case GroupBy::Pod: return EntityKind::Pod;
    case GroupBy::Node: return EntityKind::Node;
    case GroupBy::Service: return EntityKind::Service;
  }
  return EntityKind::Pod;
}

/// Mean CPU and memory per group over `window`. Node series hold the sum of
/// the pods they hosted at each tick and service series the sum of the
/// service's pods, so group averages are exact sums of pod averages.
inline std::map<std::string, Average> aggregate(const ConsumptionSeries& series, GroupBy group, Window window) {
  if (window.begin < 0 || window.end > series.length() || window.begin >= window.end)
    throw EmptyWindow("window [" + std::to_string(window.begin) + ", " + std::to_string(window.end) +
                      ") is empty or outside a run of " + std::to_string(series.length()) + " ticks");
  const EntityKind kind = kind_of(group);
  std::map<std::string, Average> out;
  for (const auto& [key, e] : series.entities()) {
    if (key.kind != kind) continue;
    Average a;
    for (Tick t = window.begin; t < window.end; ++t) {
      a.cpu += e.cpu[static_cast<std::size_t>(t)];
      a.mem += e.mem[static_cast<std::size_t>(t)];
    }
    a.cpu /= window.size();
    a.mem /= window.size();
    out.emplace(key.id, std::move(a));
  }
  return out;
}

}  // namespace k8sim
