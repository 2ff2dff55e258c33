#pragma once

#include <k8sim/io/csv.hpp>
#include <k8sim/model/cost_table.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <string>
#include <vector>

namespace k8sim {

// Cost table files:
//
//   # format_version=1
//   image,workflow,rps,service,cpu_millicores[,memory_mb]
//   A,workflow1,25,frontend,526
//
// Costs are decimals or p/q fractions. In files with a memory column an
// empty memory field means "no memory cost recorded".

inline constexpr int kCostTableFormatVersion = 1;

namespace detail {

inline void check_format_comment(const std::vector<csv::Line>& comments, const std::string& source) {
  for (const auto& c : comments) {
    auto pos = c.text.find("format_version");
    if (pos == std::string::npos) continue;
    auto eq = c.text.find_first_of("=:", pos);
    if (eq == std::string::npos) throw ParseError(source + ": row " + std::to_string(c.number) + ": malformed format_version");
    auto value = csv::trim(std::string_view(c.text).substr(eq + 1));
    if (value != std::to_string(kCostTableFormatVersion))
      throw ParseError(source + ": row " + std::to_string(c.number) + ": unsupported format_version '" +
                       std::string(value) + "'");
  }
}

}  // namespace detail

/// Parses without validating.
inline CostTable parse_cost_table_rows(const std::string& text, const std::string& source = "<cost table>") {
  std::vector<csv::Line> rows;
  std::vector<csv::Line> comments;
  csv::lines(text, rows, comments);
  detail::check_format_comment(comments, source);
  if (rows.empty()) throw ParseError(source + ": missing header");

  const auto header = csv::split(rows.front().text);
  const std::vector<std::string> base{"image", "workflow", "rps", "service", "cpu_millicores"};
  bool with_memory = false;
  if (header.size() == 6 && std::equal(base.begin(), base.end(), header.begin()) && header[5] == "memory_mb") {
    with_memory = true;
  } else if (header != base) {
    throw ParseError(source + ": row " + std::to_string(rows.front().number) +
                     ": expected header image,workflow,rps,service,cpu_millicores[,memory_mb]");
  }

  CostTable table;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& line = rows[i];
    const std::string where = source + ": row " + std::to_string(line.number);
    auto fields = csv::split(line.text);
    if (fields.size() != header.size())
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                       std::to_string(fields.size()));
    for (std::size_t c = 0; c < 4; ++c)
      if (fields[c].empty()) throw ParseError(where + ": column '" + header[c] + "' is empty");

    std::int64_t rps = 0;
    auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), rps);
    if (ec != std::errc() || ptr != fields[2].data() + fields[2].size())
      throw ParseError(where + ": column 'rps' is not an integer: '" + fields[2] + "'");

    auto cpu = parse_rational(fields[4]);
    if (!cpu) throw ParseError(where + ": column 'cpu_millicores' is not a number: '" + fields[4] + "'");
    ServiceCost cost{*cpu, std::nullopt};
    if (with_memory && !fields[5].empty()) {
      auto mem = parse_rational(fields[5]);
      if (!mem) throw ParseError(where + ": column 'memory_mb' is not a number: '" + fields[5] + "'");
      cost.mem = *mem;
    }
    table.add(fields[0], fields[1], rps, fields[3], std::move(cost));
  }
  return table;
}

inline CostTable parse_cost_table_text(const std::string& text, const std::string& source = "<cost table>") {
  CostTable table = parse_cost_table_rows(text, source);
  auto report = validate_cost_table(table);
  if (!report.ok()) {
    std::string msg = source + ": " + std::to_string(report.violations.size()) + " violation(s)";
    for (const auto& v : report.violations) msg += "; " + v.describe();
    throw ValidationError(msg);
  }
  return table;
}

inline CostTable parse_cost_table(const std::filesystem::path& path) {
  return parse_cost_table_text(csv::read_file(path), path.string());
}

inline std::string serialize_cost_table(const CostTable& table) {
  const bool with_memory = table.has_memory();
  std::string out = "# format_version=" + std::to_string(kCostTableFormatVersion) + "\n";
  out += with_memory ? "image,workflow,rps,service,cpu_millicores,memory_mb\n"
                     : "image,workflow,rps,service,cpu_millicores\n";
  for (const auto& [image, curves] : table.entries()) {
    for (const auto& [wf, curve] : curves) {
      for (const auto& knot : curve) {
        for (const auto& [service, cost] : knot.services) {
          out += image + "," + wf + "," + std::to_string(knot.rps) + "," + service + "," + to_exact_string(cost.cpu);
          if (with_memory) out += "," + (cost.mem ? to_exact_string(*cost.mem) : std::string());
          out += "\n";
        }
      }
    }
  }
  return out;
}

}  // namespace k8sim
