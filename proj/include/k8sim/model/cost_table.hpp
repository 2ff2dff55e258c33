#pragma once

#include <k8sim/errors.hpp>
#include <k8sim/rational.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace k8sim {

struct ServiceCost {
  Millicores cpu = 0;
  std::optional<MegaBytes> mem;

  bool operator==(const ServiceCost&) const = default;
};

/// Measured per-service costs of one (image, workflow) pair at one RPS level.
struct CostKnot {
  std::int64_t rps = 0;
  // Insertion order is kept so malformed input stays visible to validation.
  std::vector<std::pair<std::string, ServiceCost>> services;

  bool operator==(const CostKnot&) const = default;

  const ServiceCost* find(const std::string& service) const {
    for (const auto& [name, cost] : services)
      if (name == service) return &cost;
    return nullptr;
  }
};

/// Calibrated map (node image, workflow, RPS knot) -> per-service cost.
///
/// The container is permissive on purpose: it records rows as given and
/// `validate_cost_table` reports what is wrong with them. Lookups assume a
/// table with an empty validation report.
class CostTable {
 public:
  using Curve = std::vector<CostKnot>;
  using WorkflowCurves = std::map<std::string, Curve>;

  /// Appends a row. Consecutive rows with the same knot accumulate into one
  /// knot; a repeated knot after a different one starts a new (duplicate) knot.
  void add(const std::string& image, const std::string& workflow, std::int64_t rps,
           const std::string& service, ServiceCost cost) {
    Curve& curve = entries_[image][workflow];
    if (curve.empty() || curve.back().rps != rps) curve.push_back(CostKnot{rps, {}});
    curve.back().services.emplace_back(service, std::move(cost));
  }

  const Curve* find(const std::string& image, const std::string& workflow) const {
    auto img = entries_.find(image);
    if (img == entries_.end()) return nullptr;
    auto wf = img->second.find(workflow);
    return wf == img->second.end() ? nullptr : &wf->second;
  }

  bool has_image(const std::string& image) const { return entries_.count(image) != 0; }

  /// True when at least one row carries a memory cost.
  bool has_memory() const {
    for (const auto& [image, curves] : entries_)
      for (const auto& [wf, curve] : curves)
        for (const auto& knot : curve)
          for (const auto& [service, cost] : knot.services)
            if (cost.mem) return true;
    return false;
  }

  const std::map<std::string, WorkflowCurves>& entries() const { return entries_; }

  bool operator==(const CostTable&) const = default;

 private:
  std::map<std::string, WorkflowCurves> entries_;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  DuplicateKnot,
  UnsortedKnots,
  NonPositiveKnot,
  NegativeCost,
  DuplicateService,
  ServiceSetMismatch,
};

inline const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DuplicateKnot: return "DuplicateKnot";
    case ViolationKind::UnsortedKnots: return "UnsortedKnots";
    case ViolationKind::NonPositiveKnot: return "NonPositiveKnot";
    case ViolationKind::NegativeCost: return "NegativeCost";
    case ViolationKind::DuplicateService: return "DuplicateService";
    case ViolationKind::ServiceSetMismatch: return "ServiceSetMismatch";
  }
  return "?";
}

struct CostTableViolation {
  ViolationKind kind;
  std::string image;
  std::string workflow;
  std::int64_t rps = 0;
  std::string service;

  std::string describe() const {
    std::string s = std::string(to_string(kind)) + " at (" + image + ", " + workflow + ", " + std::to_string(rps) + ")";
    if (!service.empty()) s += " service '" + service + "'";
    return s;
  }
};

struct CostTableReport {
  std::vector<CostTableViolation> violations;

  bool ok() const { return violations.empty(); }

  bool contains(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const CostTableViolation& v) { return v.kind == kind; });
  }
};

inline CostTableReport validate_cost_table(const CostTable& table) {
  CostTableReport report;
  auto add = [&](ViolationKind kind, const std::string& image, const std::string& wf, std::int64_t rps,
                 std::string service = {}) {
    report.violations.push_back({kind, image, wf, rps, std::move(service)});
  };

  for (const auto& [image, curves] : table.entries()) {
    for (const auto& [wf, curve] : curves) {
      std::set<std::int64_t> seen;
      std::int64_t max_so_far = 0;
      bool first = true;
      for (const auto& knot : curve) {
        if (knot.rps <= 0) add(ViolationKind::NonPositiveKnot, image, wf, knot.rps);
        if (!seen.insert(knot.rps).second) {
          add(ViolationKind::DuplicateKnot, image, wf, knot.rps);
        } else if (!first && knot.rps < max_so_far) {
          add(ViolationKind::UnsortedKnots, image, wf, knot.rps);
        }
        max_so_far = first ? knot.rps : std::max(max_so_far, knot.rps);
        first = false;

        std::set<std::string> names;
        for (const auto& [service, cost] : knot.services) {
          if (!names.insert(service).second) add(ViolationKind::DuplicateService, image, wf, knot.rps, service);
          if (cost.cpu < 0 || (cost.mem && *cost.mem < 0))
            add(ViolationKind::NegativeCost, image, wf, knot.rps, service);
        }
      }

      if (curve.empty()) continue;
      std::set<std::string> reference;
      for (const auto& [service, cost] : curve.front().services) reference.insert(service);
      for (std::size_t i = 1; i < curve.size(); ++i) {
        std::set<std::string> names;
        for (const auto& [service, cost] : curve[i].services) names.insert(service);
        if (names == reference) continue;
        std::vector<std::string> diff;
        std::set_symmetric_difference(reference.begin(), reference.end(), names.begin(), names.end(),
                                      std::back_inserter(diff));
        add(ViolationKind::ServiceSetMismatch, image, wf, curve[i].rps, diff.empty() ? "" : diff.front());
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Interpolation

struct CostLookup {
  Millicores cpu = 0;
  MegaBytes mem = 0;
  // Set when the query lies above the last knot.
  bool extrapolated = false;
};

namespace detail {

inline const CostTable::Curve& require_curve(const CostTable& table, const std::string& image,
                                             const std::string& workflow) {
  if (!table.has_image(image)) throw UnknownImage("no cost table entries for image '" + image + "'");
  const auto* curve = table.find(image, workflow);
  if (curve == nullptr || curve->empty())
    throw UnknownWorkflow("image '" + image + "' has no entries for workflow '" + workflow + "'");
  return *curve;
}

inline const ServiceCost& require_service(const CostKnot& knot, const std::string& image,
                                          const std::string& workflow, const std::string& service) {
  const auto* cost = knot.find(service);
  if (cost == nullptr)
    throw UnknownService("service '" + service + "' missing at (" + image + ", " + workflow + ", " +
                         std::to_string(knot.rps) + ")");
  return *cost;
}

// Line through (x1, y1) and (x2, y2) evaluated at x.
inline Rational line(const Rational& x1, const Rational& y1, const Rational& x2, const Rational& y2,
                     const Rational& x) {
  return y1 + (x - x1) * (y2 - y1) / (x2 - x1);
}

}  // namespace detail

/// Piecewise-linear cost lookup for CPU and memory.
///
/// Exact at knots; linear between the two bracketing knots; through the
/// origin below the first knot; extended along the last segment above the
/// last knot (origin line for a single knot), clamped at zero.
inline CostLookup lookup_cost(const CostTable& table, const std::string& image, const std::string& workflow,
                              const std::string& service, const Rational& rps) {
  const auto& curve = detail::require_curve(table, image, workflow);
  if (rps < 0) throw std::invalid_argument("lookup_cost: negative rps");

  auto mem_of = [](const ServiceCost& c) { return c.mem ? *c.mem : MegaBytes(0); };

  auto upper = std::lower_bound(curve.begin(), curve.end(), rps,
                                [](const CostKnot& k, const Rational& x) { return Rational(k.rps) < x; });

  CostLookup out;
  if (upper != curve.end() && Rational(upper->rps) == rps) {
    const auto& c = detail::require_service(*upper, image, workflow, service);
    out.cpu = c.cpu;
    out.mem = mem_of(c);
    return out;
  }

  if (upper == curve.begin()) {
    const auto& first = *upper;
    const auto& c = detail::require_service(first, image, workflow, service);
    out.cpu = c.cpu * rps / first.rps;
    out.mem = mem_of(c) * rps / first.rps;
    return out;
  }

  if (upper == curve.end()) {
    out.extrapolated = true;
    const auto& last = curve.back();
    const auto& cl = detail::require_service(last, image, workflow, service);
    if (curve.size() == 1) {
      out.cpu = cl.cpu * rps / last.rps;
      out.mem = mem_of(cl) * rps / last.rps;
      return out;
    }
    const auto& prev = curve[curve.size() - 2];
    const auto& cp = detail::require_service(prev, image, workflow, service);
    out.cpu = detail::line(prev.rps, cp.cpu, last.rps, cl.cpu, rps);
    out.mem = detail::line(prev.rps, mem_of(cp), last.rps, mem_of(cl), rps);
    if (out.cpu < 0) out.cpu = 0;
    if (out.mem < 0) out.mem = 0;
    return out;
  }

  const auto& hi = *upper;
  const auto& lo = *(upper - 1);
  const auto& ch = detail::require_service(hi, image, workflow, service);
  const auto& cl = detail::require_service(lo, image, workflow, service);
  out.cpu = detail::line(lo.rps, cl.cpu, hi.rps, ch.cpu, rps);
  out.mem = detail::line(lo.rps, mem_of(cl), hi.rps, mem_of(ch), rps);
  return out;
}

inline Millicores interpolate_cost(const CostTable& table, const std::string& image, const std::string& workflow,
                                   const std::string& service, const Rational& rps) {
  return lookup_cost(table, image, workflow, service, rps).cpu;
}

}  // namespace k8sim
