#pragma once

#include <k8sim/io/csv.hpp>
#include <k8sim/io/run.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace k8sim {

// Result directory layout written by export_result:
//   series.csv        per-tick samples, 6 significant digits
//   series.exact.csv  the same samples as exact decimals or p/q fractions
//   summary.csv       trimmed-window averages, 6 significant digits
//   events.log        one event per line
//   run.json          run metadata, accounting and exact summaries
//   per_service.svg, per_node.svg

inline constexpr const char* kSeriesHeader = "time,entity_kind,entity_id,service,cpu_millicores,memory_mb";
inline constexpr const char* kSummaryHeader = "entity_kind,entity_id,avg_cpu_millicores,avg_memory_mb";

inline std::string series_csv(const ConsumptionSeries& series, bool exact) {
  auto fmt = [exact](const Rational& v) { return exact ? to_exact_string(v) : format_sig6(v); };
  std::string out = std::string(kSeriesHeader) + "\n";
  for (Tick t = 0; t < series.length(); ++t) {
    for (const auto& [key, e] : series.entities()) {
      const auto i = static_cast<std::size_t>(t);
      out += std::to_string(t) + "," + to_string(key.kind) + "," + key.id + "," + e.service + "," + fmt(e.cpu[i]) +
             "," + fmt(e.mem[i]) + "\n";
    }
  }
  return out;
}

inline std::string summary_csv(const ResultSummary& summary) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : summary.rows)
    out += std::string(to_string(r.kind)) + "," + r.id + "," + format_sig6(r.cpu) + "," + format_sig6(r.mem) + "\n";
  return out;
}

inline std::string events_log(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) out += e.line() + "\n";
  return out;
}

inline nlohmann::json run_json(const RunResult& r) {
  using nlohmann::json;
  json doc{{"name", r.name},
           {"ticks", r.ticks},
           {"window", {{"begin", r.summary.window.begin}, {"end", r.summary.window.end}}},
           {"options",
            {{"autoscaler", r.options.autoscaler}, {"wf_mix", to_string(r.options.mix)}}},
           {"accounting",
            {{"granted_millicores", to_exact_string(r.accounting.granted)},
             {"completed_cost_millicores", to_exact_string(r.accounting.completed_cost)},
             {"abandoned_consumed_millicores", to_exact_string(r.accounting.abandoned_consumed)},
             {"abandoned_remaining_millicores", to_exact_string(r.accounting.abandoned_remaining)},
             {"delivered_requests", r.accounting.delivered},
             {"completed_requests", r.accounting.completed},
             {"abandoned_requests", r.accounting.abandoned},
             {"dropped_rps", r.accounting.dropped_rps}}},
           {"unfinished",
            {{"requests", r.unfinished.requests},
             {"cpu_remaining_millicores", to_exact_string(r.unfinished.cpu_remaining)},
             {"cpu_consumed_millicores", to_exact_string(r.unfinished.cpu_consumed)},
             {"pending_pods", r.unfinished.pending_pods}}}};
  json rows = json::array();
  for (const auto& row : r.summary.rows)
    rows.push_back({{"entity_kind", to_string(row.kind)},
                    {"entity_id", row.id},
                    {"avg_cpu_millicores", to_exact_string(row.cpu)},
                    {"avg_memory_mb", to_exact_string(row.mem)}});
  doc["summary"] = std::move(rows);
  return doc;
}

// ---------------------------------------------------------------------------
// Plots

struct PlotPoint {
  std::string label;
  double value = 0;
};

/// Standalone SVG dot plot: one column per entity, one marker at its average.
inline std::string dot_plot_svg(const std::string& title, const std::string& y_label,
                                const std::vector<PlotPoint>& points) {
  const double width = std::max(320.0, 80.0 + 60.0 * static_cast<double>(points.size()));
  const double height = 320;
  const double left = 70, right = 20, top = 40, bottom = 70;
  double top_value = 0;
  for (const auto& p : points) top_value = std::max(top_value, p.value);
  if (top_value <= 0) top_value = 1;
  top_value *= 1.1;

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '&') out += "&amp;";
      else if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '"') out += "&quot;";
      else out += c;
    }
    return out;
  };
  const double plot_h = height - top - bottom;
  const double plot_w = width - left - right;
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / top_value); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                    num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape(title) + "</text>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
         num(top + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" + num(left + plot_w) + "\" y2=\"" +
         num(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = top_value * i / 4.0;
    svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y_of(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + format_sig6(v) + "</text>\n";
  }
  svg += "<text x=\"14\" y=\"" + num(top + plot_h / 2) + "\" transform=\"rotate(-90 14 " + num(top + plot_h / 2) +
         ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + escape(y_label) + "</text>\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = left + plot_w * (static_cast<double>(i) + 0.5) / static_cast<double>(points.size());
    const auto& p = points[i];
    svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y_of(p.value)) + "\" r=\"5\" fill=\"steelblue\" data-label=\"" +
           escape(p.label) + "\" data-value=\"" + format_sig6(p.value) + "\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(top + plot_h + 16) + "\" transform=\"rotate(30 " + num(x) + " " +
           num(top + plot_h + 16) + ")\" font-family=\"sans-serif\" font-size=\"10\">" + escape(p.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline std::string summary_plot(const ResultSummary& summary, EntityKind kind) {
  std::vector<PlotPoint> points;
  for (const auto& r : summary.of(kind)) points.push_back({r.id, to_double(r.cpu)});
  const std::string what = kind == EntityKind::Node ? "node" : "service";
  return dot_plot_svg(summary.name + ": average CPU per " + what, "millicores", points);
}

inline void export_csv(const RunResult& r, const std::filesystem::path& dir) {
  csv::ensure_directory(dir);
  csv::write_file(dir / "series.csv", series_csv(r.series, false));
  csv::write_file(dir / "series.exact.csv", series_csv(r.series, true));
  csv::write_file(dir / "summary.csv", summary_csv(r.summary));
  csv::write_file(dir / "events.log", events_log(r.events));
  csv::write_file(dir / "run.json", run_json(r).dump(2) + "\n");
}

inline void emit_plots(const RunResult& r, const std::filesystem::path& dir) {
  csv::ensure_directory(dir);
  csv::write_file(dir / "per_service.svg", summary_plot(r.summary, EntityKind::Service));
  csv::write_file(dir / "per_node.svg", summary_plot(r.summary, EntityKind::Node));
}

inline void export_result(const RunResult& r, const std::filesystem::path& dir) {
  export_csv(r, dir);
  emit_plots(r, dir);
}

// ---------------------------------------------------------------------------
// Re-ingestion

inline EntityKind parse_entity_kind(const std::string& s, const std::string& where) {
  if (s == "pod") return EntityKind::Pod;
  if (s == "node") return EntityKind::Node;
  if (s == "service") return EntityKind::Service;
  throw ParseError(where + ": unknown entity kind '" + s + "'");
}

inline ConsumptionSeries parse_series_csv(const std::string& text, const std::string& source = "<series>") {
  std::vector<csv::Line> rows, comments;
  csv::lines(text, rows, comments);
  if (rows.empty() || rows.front().text != kSeriesHeader) throw ParseError(source + ": row 1: unexpected header");
  ConsumptionSeries series;
  std::vector<MetricSample> batch;
  Tick current = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string where = source + ": row " + std::to_string(rows[i].number);
    auto f = csv::split(rows[i].text);
    if (f.size() != 6) throw ParseError(where + ": expected 6 columns");
    MetricSample s;
    try {
      s.time = std::stoll(f[0]);
    } catch (const std::exception&) {
      throw ParseError(where + ": bad time '" + f[0] + "'");
    }
    s.entity = {parse_entity_kind(f[1], where), f[2]};
    s.service = f[3];
    auto cpu = parse_rational(f[4]);
    auto mem = parse_rational(f[5]);
    if (!cpu || !mem) throw ParseError(where + ": bad number");
    s.cpu = *cpu;
    s.mem = *mem;
    if (s.time != current) {
      if (s.time < current) throw ParseError(where + ": time goes backwards");
      series.record_tick(current, batch);
      batch.clear();
      current = s.time;
    }
    batch.push_back(std::move(s));
  }
  if (!batch.empty()) series.record_tick(current, batch);
  return series;
}

inline std::vector<SummaryRow> parse_summary_csv(const std::string& text, const std::string& source = "<summary>") {
  std::vector<csv::Line> rows, comments;
  csv::lines(text, rows, comments);
  if (rows.empty() || rows.front().text != kSummaryHeader) throw ParseError(source + ": row 1: unexpected header");
  std::vector<SummaryRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string where = source + ": row " + std::to_string(rows[i].number);
    auto f = csv::split(rows[i].text);
    if (f.size() != 4) throw ParseError(where + ": expected 4 columns");
    auto cpu = parse_rational(f[2]);
    auto mem = parse_rational(f[3]);
    if (!cpu || !mem) throw ParseError(where + ": bad number");
    out.push_back({parse_entity_kind(f[0], where), f[1], *cpu, *mem});
  }
  return out;
}

inline ConsumptionSeries read_series_csv(const std::filesystem::path& path) {
  return parse_series_csv(csv::read_file(path), path.string());
}

inline std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  return parse_summary_csv(csv::read_file(path), path.string());
}

/// Exact summary of a result directory, recomputed from series.exact.csv.
inline ResultSummary read_result_summary(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a result directory");
  auto doc = nlohmann::json::parse(csv::read_file(dir / "run.json"), nullptr, false);
  if (doc.is_discarded() || !doc.contains("name")) throw ParseError(dir.string() + "/run.json: malformed");
  return summarize(doc["name"].get<std::string>(), read_series_csv(dir / "series.exact.csv"));
}

}  // namespace k8sim
