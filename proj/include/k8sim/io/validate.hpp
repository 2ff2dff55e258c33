#pragma once

#include <k8sim/io/csv.hpp>
#include <k8sim/io/run.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace k8sim {

// Measured data files:
//
//   experiment,entity_kind,entity_id,measured_millicores,repetitions
//   profile-P1,node,1,1480.5,5
//
// A row holds the mean over `repetitions` runs. Several rows for the same
// entity are pooled, weighted by repetitions.

inline constexpr const char* kMeasuredHeader = "experiment,entity_kind,entity_id,measured_millicores,repetitions";

struct Measurement {
  std::string experiment;
  EntityKind kind = EntityKind::Node;
  std::string id;
  double millicores = 0;
  int repetitions = 1;
};

struct MeasuredDataset {
  std::vector<Measurement> rows;

  /// Rows of one experiment; an empty name selects all rows.
  MeasuredDataset only(const std::string& experiment) const {
    MeasuredDataset out;
    for (const auto& r : rows)
      if (experiment.empty() || r.experiment == experiment) out.rows.push_back(r);
    return out;
  }
};

struct EntityError {
  EntityKind kind = EntityKind::Node;
  std::string id;
  double predicted = 0;
  double measured = 0;
  double relative_error = 0;  // |predicted - measured| / measured
};

struct ValidationReport {
  std::vector<EntityError> entities;
  // Measured entities absent from the prediction; excluded from MAPE.
  std::vector<std::pair<EntityKind, std::string>> uncovered;
  // Entities whose measured mean is 0; relative error is undefined.
  std::vector<std::pair<EntityKind, std::string>> zero_measured;
  double mape = 0;  // mean of relative errors, as a fraction
};

inline MeasuredDataset parse_measured_csv(const std::string& text, const std::string& source = "<measured>") {
  std::vector<csv::Line> rows, comments;
  csv::lines(text, rows, comments);
  if (rows.empty() || rows.front().text != kMeasuredHeader)
    throw ParseError(source + ": row " + std::to_string(rows.empty() ? 1 : rows.front().number) +
                     ": expected header " + kMeasuredHeader);
  MeasuredDataset out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string where = source + ": row " + std::to_string(rows[i].number);
    auto f = csv::split(rows[i].text);
    if (f.size() != 5) throw ParseError(where + ": expected 5 columns, got " + std::to_string(f.size()));
    Measurement m;
    m.experiment = f[0];
    if (f[1] == "pod")
      m.kind = EntityKind::Pod;
    else if (f[1] == "node")
      m.kind = EntityKind::Node;
    else if (f[1] == "service")
      m.kind = EntityKind::Service;
    else
      throw ParseError(where + ": column 'entity_kind' must be pod, node or service");
    m.id = f[2];
    try {
      std::size_t used = 0;
      m.millicores = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument(f[3]);
      m.repetitions = std::stoi(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
    } catch (const std::exception&) {
      throw ParseError(where + ": non-numeric measurement");
    }
    if (!(m.millicores >= 0) || !std::isfinite(m.millicores))
      throw ParseError(where + ": column 'measured_millicores' must be >= 0");
    if (m.repetitions < 1) throw ParseError(where + ": column 'repetitions' must be >= 1");
    out.rows.push_back(std::move(m));
  }
  return out;
}

inline MeasuredDataset read_measured_csv(const std::filesystem::path& path) {
  return parse_measured_csv(csv::read_file(path), path.string());
}

/// Compares predicted trimmed-window averages with measured means.
inline ValidationReport validate_against_measurements(const std::vector<SummaryRow>& predicted,
                                                      const MeasuredDataset& measured) {
  std::map<std::pair<EntityKind, std::string>, std::pair<double, int>> pooled;
  for (const auto& m : measured.rows) {
    auto& p = pooled[{m.kind, m.id}];
    p.first += m.millicores * m.repetitions;
    p.second += m.repetitions;
  }
  std::map<std::pair<EntityKind, std::string>, double> pred;
  for (const auto& r : predicted) pred[{r.kind, r.id}] = to_double(r.cpu);

  ValidationReport report;
  double sum = 0;
  for (const auto& [key, p] : pooled) {
    auto it = pred.find(key);
    if (it == pred.end()) {
      report.uncovered.push_back(key);
      continue;
    }
    const double mean = p.first / p.second;
    if (mean <= 0) {
      report.zero_measured.push_back(key);
      continue;
    }
    EntityError e{key.first, key.second, it->second, mean, std::abs(it->second - mean) / mean};
    sum += e.relative_error;
    report.entities.push_back(std::move(e));
  }
  if (report.entities.empty()) throw NoOverlap("no measured entity matches the prediction");
  report.mape = sum / static_cast<double>(report.entities.size());
  return report;
}

inline std::string validation_csv(const ValidationReport& r) {
  std::string out = "entity_kind,entity_id,predicted_millicores,measured_millicores,relative_error\n";
  for (const auto& e : r.entities)
    out += std::string(to_string(e.kind)) + "," + e.id + "," + format_sig6(e.predicted) + "," +
           format_sig6(e.measured) + "," + format_sig6(e.relative_error) + "\n";
  for (const auto& [kind, id] : r.uncovered) out += std::string(to_string(kind)) + "," + id + ",,,uncovered\n";
  for (const auto& [kind, id] : r.zero_measured)
    out += std::string(to_string(kind)) + "," + id + ",,0,undefined\n";
  return out;
}

}  // namespace k8sim
