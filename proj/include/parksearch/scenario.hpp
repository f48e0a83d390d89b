#pragma once

// Scenario configuration, synthetic inputs, destination generation and batch
// execution behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "parksearch/simulation.hpp"

namespace parksearch {

// ------------------------------------------------------------ synthetic grid

struct GridSpec {
  int rows = 10;
  int cols = 10;
  double block_m = 100.0;
  double speed_kmh = 30.0;
  /// Fraction of the speed limit actually driven.
  double speed_factor = 0.25;
  int resources = 150;
  /// 0 means one drive around a block.
  double round_trip_s = 0.0;
  GeoPoint origin{-37.8136, 144.9631};
};

/// Rectangular grid of two-way streets with resources spread uniformly at
/// random over the edges. Drive time is length over the driven speed.
RoadGraph make_grid_graph(const GridSpec& spec, Rng& rng);

// -------------------------------------------------------------- clustering

struct Cluster {
  int label = 0;
  std::vector<std::size_t> members;  // indices into the input, ascending
  std::vector<GeoPoint> points;      // parallel to members
};

/// Density-based clustering under great-circle distance. A point is core when
/// at least `min_pts` points, itself included, lie within `eps_m`. Clusters
/// are labeled in order of their smallest core point; a border point joins
/// the first cluster that reaches it. Noise is left out.
std::vector<Cluster> dbscan(std::span<const GeoPoint> points, double eps_m, int min_pts);

// ------------------------------------------------------------------ config

struct SingleDestination {
  std::string start_node;
  GeoPoint destination;
  int agents = 20;
  double start_time = 0.0;
};

struct DataDrivenDestinations {
  std::string start_node;
  double eps_m = 100.0;
  int min_pts = 10;
  /// Hour buckets (index = floor(time / 3600)) to generate agents for; all
  /// non-empty buckets when unset.
  std::optional<std::vector<int>> hours;
  /// Largest clusters kept per hour; all when unset.
  std::optional<int> clusters;
};

struct ExplicitAgent {
  std::string start_node;
  GeoPoint destination;
  double start_time = 0.0;
};

struct DestinationConfig {
  enum class Mode { single, data_driven, explicit_list } mode = Mode::single;
  SingleDestination single;
  DataDrivenDestinations data_driven;
  std::vector<ExplicitAgent> agents;
};

struct OccupationConfig {
  std::optional<std::filesystem::path> trace;
  /// Synthetic trace length; derived from the agents' spawn times and the
  /// trip timeout when unset.
  std::optional<double> synthetic_horizon_s;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::optional<std::filesystem::path> graph_path;
  std::optional<GridSpec> grid;
  /// Seed of the synthetic grid; fixed across runs so seeds vary only
  /// occupations and agent randomness.
  std::uint64_t grid_seed = 1;
  GraphLoadOptions graph_options;
  OccupationConfig occupations;
  CtmcParams ctmc = CtmcParams::from_mean_sojourns(120.0, 2091.0);
  DestinationConfig destinations;
  std::vector<PlannerKind> planners{PlannerKind::rpl};
  PlannerSettings planner;
  AdaptionSettings adaption;
  bool adaption_with_reservations = true;
  std::vector<std::uint64_t> seeds{1};
  double horizon_s = kTripTimeoutS;
  bool record_wall_clock = true;
};

/// Parses and validates a config document; relative paths resolve against
/// `base_dir`. Throws ConfigError.
ScenarioConfig parse_scenario_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
/// Every setting including defaults, with paths made absolute.
nlohmann::json to_json(const ScenarioConfig& config);

// ------------------------------------------------------------- generation

/// N identical agents; N = 0 or an unknown start node is a ConfigError.
std::vector<AgentSpec> generate_single_destination(const SingleDestination& config, const RoadGraph& graph,
                                                   PlannerKind planner);

struct OccupationPoint {
  GeoPoint position;
  double time = 0.0;
};

/// Every switch to occupied in the trace, at its resource's position.
std::vector<OccupationPoint> occupation_points(const RoadGraph& graph, const OccupationTrace& trace);

struct DataDrivenResult {
  std::vector<AgentSpec> agents;
  std::vector<std::string> warnings;
};

/// One agent per member of the selected clusters of each hour, destination
/// drawn uniformly from the cluster's bounding box restricted to points within
/// eps of a member, start time uniform over the hour.
DataDrivenResult generate_data_driven(const DataDrivenDestinations& config, const RoadGraph& graph,
                                      std::span<const OccupationPoint> events, PlannerKind planner,
                                      Rng& rng);

// -------------------------------------------------------------- execution

/// Graph, matrix and per-seed inputs shared by every planner of a scenario.
class PreparedScenario {
 public:
  explicit PreparedScenario(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  const RoadGraph& graph() const { return graph_; }
  const TravelTimeMatrix& matrix() const { return matrix_; }

  struct SeedInputs {
    OccupationTrace trace;
    std::vector<AgentSpec> agents;  // planner field unset
    std::vector<std::string> warnings;
  };
  /// Pure function of (config, seed).
  SeedInputs inputs(std::uint64_t seed) const;

  SimulationSettings settings() const;

  std::vector<MetricsRecord> run(const SeedInputs& inputs, PlannerKind planner, std::uint64_t seed) const;

 private:
  ScenarioConfig config_;
  RoadGraph graph_;
  TravelTimeMatrix matrix_;
};

std::string results_file_name(PlannerKind planner, std::uint64_t seed);

struct RunFailure {
  std::string scenario;
  PlannerKind planner = PlannerKind::rpl;
  std::uint64_t seed = 0;
  std::string message;
};

struct BatchReport {
  std::vector<std::filesystem::path> results_files;
  std::vector<RunFailure> failures;
  std::vector<std::string> warnings;
};

/// Runs every (planner, seed) of one scenario into `out_dir`: one results
/// file per run, the resolved config and summary.csv.
BatchReport run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir, int parallel = 1);

/// Runs every *.json config in `config_dir`, each into its own subdirectory of
/// `out_dir`. A failing run is reported without stopping the others.
BatchReport run_batch(const std::filesystem::path& config_dir, const std::filesystem::path& out_dir,
                      int parallel = 1);

/// Reads every results_*.csv in `dir` (sorted by name) and aggregates them.
std::vector<PlannerSummary> summarize_directory(const std::filesystem::path& dir);

inline constexpr const char* kSummaryHeader =
    "planner,agents,mean_parking_s,total_parking_s,reduction_pct,unsuccessful_claims,timed_out,"
    "computation_median_ms,computation_p90_ms";

void write_summary_csv(std::ostream& out, std::span<const PlannerSummary> rows);

}  // namespace parksearch
