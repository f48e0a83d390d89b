#pragma once

// Policies that map an agent's fully observed situation at an intersection
// to the next action: replanning in the most likely future, hindsight
// planning over sampled futures, and two baselines that ignore
// availability predictions.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "parksearch/availability.hpp"
#include "parksearch/reservations.hpp"
#include "parksearch/road_graph.hpp"
#include "parksearch/rng.hpp"

namespace parksearch {

enum class PlannerKind { random, heuristic, rpl, hs, rpl_r, hs_r, hs_a };

std::string_view to_string(PlannerKind kind);
PlannerKind planner_kind_from_string(std::string_view text);

constexpr bool is_replanning(PlannerKind k) { return k == PlannerKind::rpl || k == PlannerKind::rpl_r; }
constexpr bool is_hindsight(PlannerKind k) {
  return k == PlannerKind::hs || k == PlannerKind::hs_r || k == PlannerKind::hs_a;
}
constexpr bool uses_reservations(PlannerKind k) {
  return k == PlannerKind::rpl_r || k == PlannerKind::hs_r;
}
constexpr bool uses_adaptions(PlannerKind k) { return k == PlannerKind::hs_a; }

struct TakeRoad {
  EdgeIndex edge;
  bool operator==(const TakeRoad&) const = default;
};

struct TakeResource {
  ResourceIndex resource;
  bool operator==(const TakeResource&) const = default;
};

using Action = std::variant<TakeRoad, TakeResource>;

/// Snapshot handed to a policy for one decision. Everything it points to
/// stays unchanged until the decision returns.
struct PlanningView {
  const RoadGraph* graph = nullptr;
  const TravelTimeMatrix* matrix = nullptr;
  std::span<const ResourceState> states;  // observed at `now`
  std::span<const CtmcParams> params;
  std::span<const double> claim_wait;      // expected wait per resource when occupied
  std::span<const double> terminal_costs;  // walk to this agent's destination
  const ReservationTable* reservations = nullptr;
  const AdaptionOverlay* overlay = nullptr;
  AgentId agent;
  double now = 0.0;

  ResourceBelief belief(ResourceIndex r) const { return {states[r.get()], now, params[r.get()]}; }
  bool available_now(ResourceIndex r) const { return states[r.get()] == ResourceState::available; }

  /// Available now and, when reservations are in view, not claimed first by
  /// another agent's reservation given our arrival time.
  bool treated_available(ResourceIndex r, double arrival) const;

  /// CTMC prediction at `at`, lowered by other agents' adaptions.
  double predicted_availability(ResourceIndex r, double at) const;

  double drive_to(NodeIndex from, ResourceIndex r) const {
    return drive_time_to_resource(*graph, *matrix, from, r);
  }
};

struct QEstimate {
  Action action;
  double value = 0.0;
};

/// Optimal hindsight choice within one sampled future.
struct DeterminizationSolution {
  std::optional<ResourceIndex> resource;
  double cost = kUnreachable;
  double arrival = kUnreachable;  // absolute time of reaching the resource
};

struct RouteDecision {
  Action chosen;
  std::optional<ResourceIndex> target;
  std::optional<double> expected_arrival;
  bool target_treated_available = false;
  std::vector<QEstimate> q_estimates;
  bool recomputed = false;
  /// Hindsight only: per-future solutions behind the chosen road action.
  std::vector<DeterminizationSolution> solutions;
};

enum class SearchPhase : std::uint8_t { approach, searching };

/// Per-agent state a policy may read and update between decisions.
struct AgentState {
  AgentId id;
  NodeIndex node;
  GeoPoint destination;
  NodeIndex destination_node;
  std::optional<EdgeIndex> destination_edge;
  std::optional<EdgeIndex> last_edge;
  std::optional<RouteDecision> cached;
  SearchPhase phase = SearchPhase::approach;
  double search_started = 0.0;
};

struct HeuristicSettings {
  double far_radius_m = 500.0;
  double base_threshold_s = 120.0;
  double relax_per_minute_s = 10.0;
};

struct PlannerSettings {
  int determinizations = 100;
  /// Hindsight planning ignores resources farther than this drive time.
  std::optional<double> hindsight_horizon_s;
  HeuristicSettings heuristic;
  bool parallel_solve = true;
};

// ---------------------------------------------------------------- replanning

/// Least-cost plan on the graph extended with a virtual goal: resources
/// treated available cost drive + walk, the rest additionally their expected
/// wait. Throws NoPathError when no resource is reachable.
RouteDecision replan_route(const PlanningView& view, NodeIndex from);

/// Follows the cached plan while its target is still treated available,
/// otherwise replans from the current node.
RouteDecision replanning_policy_step(const PlanningView& view, AgentState& agent);

// ----------------------------------------------------------------- hindsight

struct Determinization {
  std::vector<std::uint8_t> available;  // parallel to DeterminizationSet::scope
  std::uint64_t seed = 0;
};

/// Sampled futures for one departure node and time. Arrival times come from
/// the travel time matrix.
struct DeterminizationSet {
  NodeIndex from;
  double depart_time = 0.0;
  std::vector<ResourceIndex> scope;  // ascending
  std::vector<double> drive;         // drive time from `from`, parallel to scope
  std::vector<Determinization> futures;
};

/// `n` futures; each gets its own stream derived from one draw of `rng`.
DeterminizationSet sample_determinizations(const PlanningView& view, NodeIndex from, int n,
                                           Rng& rng, std::optional<double> depart_time = {},
                                           std::optional<double> horizon_s = {});

/// Same as above with an explicit base seed, so several actions can share
/// common random numbers.
DeterminizationSet sample_determinizations_seeded(const PlanningView& view, NodeIndex from, int n,
                                                  std::uint64_t base_seed, double depart_time,
                                                  std::optional<double> horizon_s = {});

/// Cheapest resource in future `k`; occupied resources cost their expected
/// wait on top. Ties go to the smallest resource index.
DeterminizationSolution solve_determinization(const PlanningView& view,
                                              const DeterminizationSet& set,
                                              std::size_t k);

/// Solves every future. Futures are independent, so this runs as an OpenMP
/// parallel loop; the result equals solve_determinizations_serial.
std::vector<DeterminizationSolution> solve_determinizations(const PlanningView& view,
                                                            const DeterminizationSet& set);
std::vector<DeterminizationSolution> solve_determinizations_serial(const PlanningView& view,
                                                                   const DeterminizationSet& set);

/// Resource chosen in most futures (ties to the smallest index) and the mean
/// arrival time over the futures that chose it.
std::optional<std::pair<ResourceIndex, double>> modal_target(
    std::span<const DeterminizationSolution> solutions);

/// One-step look-ahead over hindsight values of the successor states.
RouteDecision hindsight_policy_step(const PlanningView& view, AgentState& agent,
                                    const PlannerSettings& settings, Rng& rng);

// ----------------------------------------------------------------- baselines

/// Drives to the destination street, then takes random streets and parks at
/// the first available resource it passes.
Action random_baseline_policy(const PlanningView& view, AgentState& agent, Rng& rng);

/// Simplified human-driver heuristic: heads for the destination and accepts
/// an available spot once within range, with a walk threshold that relaxes
/// as the search goes on.
Action heuristic_driver_policy(const PlanningView& view, AgentState& agent,
                               const HeuristicSettings& settings, Rng& rng);

/// Walk threshold the heuristic driver accepts after `searching_s` seconds.
double heuristic_threshold(const HeuristicSettings& settings, double searching_s);

/// Dispatches to the policy for `kind`.
RouteDecision decide(PlannerKind kind, const PlanningView& view, AgentState& agent,
                     const PlannerSettings& settings, Rng& rng);

/// Checks the action's adjacency invariant at `node`.
bool action_valid_at(const RoadGraph& graph, NodeIndex node, const Action& action);

}  // namespace parksearch
