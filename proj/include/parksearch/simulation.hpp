#pragma once

// Discrete-event simulation of fleet agents searching for resources while
// the resources themselves flip according to a replayed or synthesized
// occupation trace.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parksearch/availability.hpp"
#include "parksearch/fleet.hpp"
#include "parksearch/planning.hpp"
#include "parksearch/road_graph.hpp"

namespace parksearch {

inline constexpr double kTripTimeoutS = 7200.0;

struct OccupationEvent {
  ResourceIndex resource;
  double time = 0.0;
  ResourceState state = ResourceState::occupied;

  bool operator==(const OccupationEvent&) const = default;
};

/// Initial state of every resource plus later state changes, ordered by
/// (time, resource). Per resource, times strictly increase and states
/// alternate starting from the opposite of the initial state.
struct OccupationTrace {
  std::vector<ResourceState> initial;
  std::vector<OccupationEvent> events;

  bool operator==(const OccupationTrace&) const = default;
};

/// Throws TraceError on non-monotone or non-alternating events or on
/// resources outside [0, resource_count).
void validate_trace(const OccupationTrace& trace, std::size_t resource_count);

/// Validated flips in processing order.
std::vector<OccupationEvent> replay_trace(const OccupationTrace& trace, std::size_t resource_count);

/// Stationary initial states, then alternating exponential sojourns until
/// `horizon_s`. `params` is indexed by resource.
OccupationTrace synthesize_occupations(std::span<const CtmcParams> params, double horizon_s, Rng& rng);

/// Time-averaged fraction of resources available over [0, horizon_s].
double mean_availability(const OccupationTrace& trace, double horizon_s);

/// Rounds times to whole seconds, dropping events that would no longer
/// strictly increase or alternate.
OccupationTrace quantize_trace(const OccupationTrace& trace);

/// `resource_id,time_s,state`. Rows at time 0 set the initial state; a
/// resource without one starts opposite to its first event, or available.
OccupationTrace read_trace_csv(std::istream& in, const RoadGraph& graph);
OccupationTrace read_trace_file(const std::filesystem::path& path, const RoadGraph& graph);
/// Writes the quantized trace including time-0 rows for every resource.
void write_trace_csv(std::ostream& out, const OccupationTrace& trace, const RoadGraph& graph);

/// Current resource states when trace replay and fleet parking interleave.
/// A fleet agent's parking lasts for the rest of the run, so every later
/// trace flip of that resource is suppressed.
class ResourceLedger {
 public:
  explicit ResourceLedger(std::vector<ResourceState> initial);

  /// Applies a trace flip; returns false when it was suppressed.
  bool apply_trace_flip(const OccupationEvent& event);
  void claim_by_fleet(ResourceIndex r);

  ResourceState state(ResourceIndex r) const { return states_[r.get()]; }
  bool fleet_occupied(ResourceIndex r) const { return fleet_[r.get()] != 0; }
  std::span<const ResourceState> states() const { return states_; }

 private:
  std::vector<ResourceState> states_;
  std::vector<std::uint8_t> fleet_;
};

struct AgentSpec {
  AgentId id;
  NodeIndex start_node;
  GeoPoint destination;
  double start_time = 0.0;
  PlannerKind planner = PlannerKind::rpl;
};

enum class AgentStatus : std::uint8_t { driving, parked, timed_out };

const char* to_string(AgentStatus s);
AgentStatus agent_status_from_string(std::string_view text);

struct AgentOutcome {
  AgentId id;
  PlannerKind planner = PlannerKind::rpl;
  AgentStatus status = AgentStatus::driving;
  double total_trip_s = 0.0;
  int unsuccessful_claims = 0;
  double computation_s = 0.0;
  std::optional<ResourceIndex> parked_resource;
};

struct SimulationSettings {
  double trip_timeout_s = kTripTimeoutS;
  CtmcParams ctmc;
  PlannerSettings planner;
  AdaptionSettings adaption;
  /// hs_a agents also place and respect hindsight reservations.
  bool adaption_with_reservations = true;
  bool record_wall_clock = true;
  bool record_log = false;
};

struct NodeVisit {
  AgentId agent;
  NodeIndex node;
  double time = 0.0;
  std::optional<EdgeIndex> via;
};

struct ClaimAttempt {
  AgentId agent;
  ResourceIndex resource;
  double time = 0.0;
  bool success = false;
};

struct StatusCount {
  double time = 0.0;
  std::size_t spawned = 0;
  std::size_t driving = 0;
  std::size_t parked = 0;
  std::size_t timed_out = 0;
};

/// Optional event log used by invariant checks.
struct SimulationLog {
  std::vector<NodeVisit> visits;
  std::vector<ClaimAttempt> claims;
  std::vector<StatusCount> status;
  /// Decisions whose view missed a flip with a timestamp at or before the
  /// decision time.
  std::size_t stale_views = 0;
  std::size_t invalid_actions = 0;
};

struct SimulationResult {
  std::vector<AgentOutcome> outcomes;  // ordered by agent id
  SimulationLog log;
};

/// Per-resource CTMC rates: graph overrides or the global default.
std::vector<CtmcParams> resource_params(const RoadGraph& graph, const CtmcParams& global);
/// Expected wait for every resource given its rates and round trip time.
std::vector<double> resource_claim_waits(const RoadGraph& graph, std::span<const CtmcParams> params);

SimulationResult simulate(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                          const OccupationTrace& trace, std::span<const AgentSpec> agents,
                          const SimulationSettings& settings, std::uint64_t seed);

/// Trip time of a taxi dropping the passenger at the best node: least drive
/// plus walk, with no parking.
double taxi_time(const RoadGraph& graph, const TravelTimeMatrix& matrix, const AgentSpec& spec);

struct MetricsRecord {
  std::uint32_t agent = 0;
  PlannerKind planner = PlannerKind::rpl;
  double total_trip_s = 0.0;
  double taxi_s = 0.0;
  double parking_s = 0.0;
  int unsuccessful_claims = 0;
  double computation_ms = 0.0;
  std::string parked_resource;  // empty when not parked
  AgentStatus status = AgentStatus::driving;

  bool operator==(const MetricsRecord&) const = default;
};

std::vector<MetricsRecord> compute_metrics(const RoadGraph& graph,
                                           std::span<const AgentOutcome> outcomes,
                                           std::span<const double> taxi_times);

/// simulate + taxi times + compute_metrics.
std::vector<MetricsRecord> run_simulation(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                                          const OccupationTrace& trace,
                                          std::span<const AgentSpec> agents,
                                          const SimulationSettings& settings, std::uint64_t seed);

inline constexpr const char* kResultsHeader =
    "agent_id,planner,total_trip_s,taxi_s,parking_s,unsuccessful_claims,computation_ms,"
    "parked_resource,status";

void write_results_csv(std::ostream& out, std::span<const MetricsRecord> records);
std::vector<MetricsRecord> read_results_csv(std::istream& in);

struct PlannerSummary {
  PlannerKind planner = PlannerKind::rpl;
  std::size_t agents = 0;
  double mean_parking_s = 0.0;
  double total_parking_s = 0.0;
  long unsuccessful_claims = 0;
  std::size_t timed_out = 0;
  double computation_median_ms = 0.0;
  double computation_p90_ms = 0.0;
  /// Fleet variants: reduction of total parking time against their base.
  std::optional<double> reduction_pct;
};

/// (base - variant) / base in percent.
double reduction_percent(double base_total, double variant_total);

/// Base planner a fleet variant is compared against, if any.
std::optional<PlannerKind> single_agent_base(PlannerKind kind);

/// Aggregates per planner kind, in enum order.
std::vector<PlannerSummary> summarize(std::span<const MetricsRecord> records);

/// Linear-interpolated quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace parksearch
