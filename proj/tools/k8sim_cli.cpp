// k8sim command line: simulate, compare, validate.

#include <k8sim/k8sim.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace k8sim;

namespace {

int cmd_simulate(const fs::path& scenario_path, const fs::path& table_path, const fs::path& out,
                 std::optional<Tick> ticks, bool no_autoscaler, const std::string& wf_mix) {
  const Scenario scenario = parse_scenario(scenario_path);
  const CostTable table = parse_cost_table(table_path);
  RunOverrides overrides;
  overrides.ticks = ticks;
  overrides.no_autoscaler = no_autoscaler;
  if (wf_mix == "share")
    overrides.mix = WorkflowMix::Share;
  else if (wf_mix == "additive")
    overrides.mix = WorkflowMix::Additive;

  const RunResult result = run_scenario(scenario, table, overrides);
  export_result(result, out);

  std::printf("%s: %lld ticks, window [%lld, %lld)\n", result.name.c_str(), static_cast<long long>(result.ticks),
              static_cast<long long>(result.summary.window.begin), static_cast<long long>(result.summary.window.end));
  for (const auto& r : result.summary.of(EntityKind::Node))
    std::printf("  node %-4s cpu %s mc  mem %s MB\n", r.id.c_str(), format_sig6(r.cpu).c_str(),
                format_sig6(r.mem).c_str());
  if (result.unfinished.requests > 0)
    std::printf("  unfinished: %llu requests, %s mc remaining\n",
                static_cast<unsigned long long>(result.unfinished.requests),
                format_sig6(result.unfinished.cpu_remaining).c_str());
  std::printf("  wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_compare(const fs::path& out, const std::vector<std::string>& result_dirs) {
  std::vector<ResultSummary> summaries;
  for (const auto& dir : result_dirs) summaries.push_back(read_result_summary(dir));
  const ComparisonReport report = compare_scenarios(summaries);
  csv::ensure_directory(out);
  csv::write_file(out / "comparison.csv", comparison_csv(report));
  csv::write_file(out / "side_by_side.csv", comparison_side_by_side_csv(report));
  for (const auto& e : report.ranked) {
    const double r = e.balance.max_min_ratio;
    std::printf("%zu. %-24s max/min %s  stddev %s mc  total %s mc%s\n", e.rank, e.name.c_str(),
                std::isinf(r) ? "inf" : format_sig6(r).c_str(), format_sig6(e.balance.stddev).c_str(),
                format_sig6(e.total_load).c_str(), e.tied_with_previous ? "  (tie)" : "");
  }
  std::printf("ratio gap %s\n", format_sig6(report.ratio_gap).c_str());
  return 0;
}

int cmd_validate(const fs::path& result_dir, const fs::path& measured_path, std::optional<double> max_mape) {
  const ResultSummary summary = read_result_summary(result_dir);
  MeasuredDataset measured = read_measured_csv(measured_path);
  MeasuredDataset selected = measured.only(summary.name);
  if (selected.rows.empty()) selected = measured;
  const ValidationReport report = validate_against_measurements(summary.rows, selected);
  std::cout << validation_csv(report);
  std::printf("MAPE %s\n", format_sig6(report.mape).c_str());
  if (max_mape && report.mape > *max_mape) {
    std::fprintf(stderr, "validation failed: MAPE %s exceeds %s\n", format_sig6(report.mape).c_str(),
                 format_sig6(*max_mape).c_str());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logical-time simulator for CPU and memory of microservice deployments"};
  app.require_subcommand(1);

  std::string scenario, table, out, wf_mix;
  Tick ticks = 0;
  bool no_autoscaler = false;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write a result directory");
  simulate->add_option("--scenario", scenario, "Scenario JSON file")->required();
  simulate->add_option("--cost-table", table, "Cost table CSV file")->required();
  simulate->add_option("--out", out, "Output directory")->required();
  auto* ticks_opt = simulate->add_option("--ticks", ticks, "Override the scenario duration")->check(CLI::PositiveNumber);
  simulate->add_flag("--no-autoscaler", no_autoscaler, "Disable the autoscaler");
  simulate->add_option("--wf-mix", wf_mix, "Mixed-workflow rule")->check(CLI::IsMember({"share", "additive"}));

  std::string compare_out;
  std::vector<std::string> results;
  auto* compare = app.add_subcommand("compare", "Rank result directories by node balance");
  compare->add_option("--out", compare_out, "Output directory")->required();
  compare->add_option("results", results, "Result directories")->required()->expected(2, -1);

  std::string result_dir, measured;
  double max_mape = 0;
  auto* validate = app.add_subcommand("validate", "Compare a result with measured data");
  validate->add_option("--result", result_dir, "Result directory")->required();
  validate->add_option("--measured", measured, "Measured data CSV")->required();
  auto* mape_opt = validate->add_option("--max-mape", max_mape, "Fail with exit code 2 above this MAPE (fraction)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate)
      return cmd_simulate(scenario, table, out, ticks_opt->count() ? std::optional<Tick>(ticks) : std::nullopt,
                          no_autoscaler, wf_mix);
    if (*compare) return cmd_compare(compare_out, results);
    if (*validate)
      return cmd_validate(result_dir, measured, mape_opt->count() ? std::optional<double>(max_mape) : std::nullopt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
