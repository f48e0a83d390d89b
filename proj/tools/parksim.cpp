// Command-line front end: run scenarios, generate inputs, summarize results.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "parksearch/errors.hpp"
#include "parksearch/scenario.hpp"

namespace fs = std::filesystem;
using namespace parksearch;

namespace {

void print_summary(const std::vector<PlannerSummary>& rows) {
  std::printf("%-10s %7s %12s %10s %8s %9s %12s %12s\n", "planner", "agents", "mean_park_s", "reduction", "claims",
              "timeouts", "median_ms", "p90_ms");
  for (const PlannerSummary& s : rows) {
    const std::string reduction = s.reduction_pct ? std::to_string(*s.reduction_pct).substr(0, 6) + "%" : "-";
    std::printf("%-10s %7zu %12.1f %10s %8ld %9zu %12.3f %12.3f\n", std::string(to_string(s.planner)).c_str(),
                s.agents, s.mean_parking_s, reduction.c_str(), s.unsuccessful_claims, s.timed_out,
                s.computation_median_ms, s.computation_p90_ms);
  }
}

int report(const BatchReport& r, const fs::path& out_dir) {
  for (const std::string& w : r.warnings) std::cerr << "warning: " << w << '\n';
  for (const RunFailure& f : r.failures) {
    std::cerr << "error: " << f.scenario << " " << to_string(f.planner) << " seed " << f.seed << ": " << f.message
              << '\n';
  }
  std::cout << r.results_files.size() << " results files written under " << out_dir.string() << '\n';
  return r.failures.empty() ? 0 : 1;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

nlohmann::json explicit_agents(const RoadGraph& graph, const std::vector<AgentSpec>& agents) {
  nlohmann::json list = nlohmann::json::array();
  for (const AgentSpec& a : agents) {
    list.push_back({{"start_node", graph.node(a.start_node).id},
                    {"lat", a.destination.lat},
                    {"lon", a.destination.lon},
                    {"start_time", a.start_time}});
  }
  return {{"mode", "explicit"}, {"agents", list}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleet parking search simulator"};
  app.require_subcommand(1);

  auto* simulate_cmd = app.add_subcommand("simulate", "Run every planner and seed of one scenario config");
  std::string config_path;
  std::string out_dir;
  int parallel = 1;
  simulate_cmd->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("--out", out_dir, "Results directory (default results/<name>)");
  simulate_cmd->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* batch_cmd = app.add_subcommand("batch", "Run every *.json config in a directory");
  std::string config_dir;
  batch_cmd->add_option("config_dir", config_dir, "Directory of scenario configs")->required()->check(CLI::ExistingDirectory);
  batch_cmd->add_option("--out", out_dir, "Results root (default results)");
  batch_cmd->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* summarize_cmd = app.add_subcommand("summarize", "Aggregate the results files of a directory");
  std::string results_dir;
  summarize_cmd->add_option("results_dir", results_dir, "Directory with results_*.csv")->required()->check(CLI::ExistingDirectory);

  auto* gen_cmd = app.add_subcommand("gen-scenario", "Generate scenario inputs");
  gen_cmd->require_subcommand(1);
  std::string out_path;
  std::string graph_path;
  std::string trace_path;
  std::string start_node;
  std::uint64_t seed = 1;

  auto* grid_cmd = gen_cmd->add_subcommand("grid", "Synthetic grid road graph (JSON)");
  GridSpec grid;
  grid_cmd->add_option("--rows", grid.rows)->capture_default_str();
  grid_cmd->add_option("--cols", grid.cols)->capture_default_str();
  grid_cmd->add_option("--block-m", grid.block_m)->capture_default_str();
  grid_cmd->add_option("--speed-kmh", grid.speed_kmh)->capture_default_str();
  grid_cmd->add_option("--speed-factor", grid.speed_factor)->capture_default_str();
  grid_cmd->add_option("--resources", grid.resources)->capture_default_str();
  grid_cmd->add_option("--round-trip-s", grid.round_trip_s, "0 = one block loop")->capture_default_str();
  grid_cmd->add_option("--seed", seed)->capture_default_str();
  grid_cmd->add_option("--out", out_path)->required();

  auto* trace_cmd = gen_cmd->add_subcommand("trace", "Synthetic occupation trace (CSV)");
  double horizon = 7200.0;
  double lambda_inv = 120.0;
  double mu_inv = 2091.0;
  trace_cmd->add_option("--graph", graph_path)->required()->check(CLI::ExistingFile);
  trace_cmd->add_option("--horizon-s", horizon)->capture_default_str();
  trace_cmd->add_option("--lambda-inv-s", lambda_inv, "Mean available sojourn")->capture_default_str();
  trace_cmd->add_option("--mu-inv-s", mu_inv, "Mean occupied sojourn")->capture_default_str();
  trace_cmd->add_option("--seed", seed)->capture_default_str();
  trace_cmd->add_option("--out", out_path)->required();

  auto* single_cmd = gen_cmd->add_subcommand("single", "N agents sharing start and destination");
  SingleDestination single;
  single_cmd->add_option("--graph", graph_path)->required()->check(CLI::ExistingFile);
  single_cmd->add_option("--start-node", single.start_node)->required();
  single_cmd->add_option("--lat", single.destination.lat)->required();
  single_cmd->add_option("--lon", single.destination.lon)->required();
  single_cmd->add_option("--agents", single.agents)->capture_default_str();
  single_cmd->add_option("--start-time", single.start_time)->capture_default_str();
  single_cmd->add_option("--out", out_path)->required();

  auto* data_cmd = gen_cmd->add_subcommand("data-driven", "Agents from clustered occupations of a trace");
  DataDrivenDestinations data;
  std::vector<int> hours;
  int clusters = 0;
  data_cmd->add_option("--graph", graph_path)->required()->check(CLI::ExistingFile);
  data_cmd->add_option("--trace", trace_path)->required()->check(CLI::ExistingFile);
  data_cmd->add_option("--start-node", data.start_node)->required();
  data_cmd->add_option("--eps-m", data.eps_m)->required();
  data_cmd->add_option("--min-pts", data.min_pts)->required();
  data_cmd->add_option("--hours", hours, "Hour buckets to use (default all)");
  data_cmd->add_option("--clusters", clusters, "Largest clusters kept per hour (default all)");
  data_cmd->add_option("--seed", seed)->capture_default_str();
  data_cmd->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate_cmd) {
      const ScenarioConfig config = load_scenario_config(config_path);
      const fs::path out = out_dir.empty() ? fs::path("results") / config.name : fs::path(out_dir);
      const BatchReport r = run_scenario(config, out, parallel);
      if (!r.results_files.empty()) print_summary(summarize_directory(out));
      return report(r, out);
    }
    if (*batch_cmd) {
      const fs::path out = out_dir.empty() ? fs::path("results") : fs::path(out_dir);
      return report(run_batch(config_dir, out, parallel), out);
    }
    if (*summarize_cmd) {
      const auto rows = summarize_directory(results_dir);
      std::ofstream out(fs::path(results_dir) / "summary.csv");
      write_summary_csv(out, rows);
      print_summary(rows);
      return 0;
    }
    if (*grid_cmd) {
      Rng rng(seed);
      write_json(out_path, to_json(make_grid_graph(grid, rng)));
      return 0;
    }
    if (*trace_cmd) {
      const RoadGraph graph = load_graph_file(graph_path);
      const auto params = resource_params(graph, CtmcParams::from_mean_sojourns(lambda_inv, mu_inv));
      Rng rng(seed);
      const OccupationTrace trace = synthesize_occupations(params, horizon, rng);
      std::ofstream out(out_path);
      write_trace_csv(out, trace, graph);
      if (!out) throw Error("cannot write " + out_path);
      return 0;
    }
    if (*single_cmd) {
      const RoadGraph graph = load_graph_file(graph_path);
      write_json(out_path, explicit_agents(graph, generate_single_destination(single, graph, PlannerKind::rpl)));
      return 0;
    }
    if (*data_cmd) {
      const RoadGraph graph = load_graph_file(graph_path);
      const OccupationTrace trace = read_trace_file(trace_path, graph);
      if (!hours.empty()) data.hours = hours;
      if (clusters > 0) data.clusters = clusters;
      Rng rng(seed);
      const auto points = occupation_points(graph, trace);
      DataDrivenResult r = generate_data_driven(data, graph, points, PlannerKind::rpl, rng);
      for (const std::string& w : r.warnings) std::cerr << "warning: " << w << '\n';
      write_json(out_path, explicit_agents(graph, r.agents));
      std::cout << r.agents.size() << " agents\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
