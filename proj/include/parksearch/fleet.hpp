#pragma once

// Fleet coordination on top of the single-agent planners: reservations
// derived from hindsight solutions, and probability adaptions estimated with
// a self-interacting biased random walk around an agent's target.

#include <optional>
#include <span>
#include <vector>

#include "parksearch/availability.hpp"
#include "parksearch/planning.hpp"
#include "parksearch/reservations.hpp"

namespace parksearch {

/// Reservation for a hindsight agent: a short-term one when it is about to
/// take a resource, otherwise one on the resource chosen most often across
/// the futures, arriving at the mean arrival time of those futures.
std::optional<Reservation> hindsight_reservation(const PlanningView& view,
                                                 std::span<const DeterminizationSolution> solutions,
                                                 AgentId agent, const Action& current);

struct AdaptionSettings {
  int samples = 30;
  double isochrone_s = 300.0;
  double visit_decay = 0.95;
  /// Lower clamp for the distance factor so edges ending at the target keep
  /// a non-zero weight.
  double min_distance_factor = 1e-3;
  int max_steps = 1000;
  /// Start each walk with P(target available) instead of P(target occupied).
  bool initial_available = false;
  /// Walks that stop before their first jump count as ending on the target's
  /// own edge instead of being dropped.
  bool stopped_walks_on_target = false;
};

struct WalkPath {
  std::vector<EdgeIndex> edges;
  double path_probability = 0.0;
  double accumulated_time = 0.0;
};

struct AdaptionEntry {
  ResourceIndex resource;
  double activation_time = 0.0;
  double delta = 0.0;

  bool operator==(const AdaptionEntry&) const = default;
};

struct AdaptionRecord {
  AgentId owner;
  std::uint64_t id = 0;  // assigned by apply_adaptions
  std::vector<AdaptionEntry> entries;
};

/// Probability that at least one resource on `edge` is vacant at `t`, with
/// independent resources. Zero for an edge without resources.
double edge_vacancy_probability(const PlanningView& view, EdgeIndex edge, double t);

/// Distance factor of the walk bias: drive time from the edge's end to the
/// target over the isochrone limit, clamped to [min_distance_factor, 1].
double distance_factor(const PlanningView& view, EdgeIndex edge, ResourceIndex target,
                       const AdaptionSettings& settings);

/// Unnormalized jump weight of taking `edge` at time `t`.
double jump_weight(const PlanningView& view, EdgeIndex edge, double t, bool visited,
                   ResourceIndex target, const AdaptionSettings& settings);

/// The random walks alone. Each starts at the end of the target's edge with
/// the probability that the target is occupied on arrival; at every
/// intersection it stops with probability 1 - P_path, otherwise it jumps
/// along an edge inside the isochrone chosen proportionally to its weight.
/// Throws DegenerateTargetError when the start node has no outgoing edges.
std::vector<WalkPath> biased_random_walks(const PlanningView& view, ResourceIndex target,
                                          double t_arrival, const AdaptionSettings& settings,
                                          Rng& rng);

/// Groups walks by last edge and spreads each group's mean path probability
/// evenly over the resources of that edge, activating at the group's mean
/// arrival time. Walks that never left the start are grouped under
/// `start_edge` when given, dropped otherwise.
AdaptionRecord create_adaptions(const RoadGraph& graph, std::span<const WalkPath> paths,
                                AgentId owner, std::optional<EdgeIndex> start_edge = std::nullopt);

/// Walks plus create_adaptions for the view's agent.
AdaptionRecord adapt_probabilities(const PlanningView& view, ResourceIndex target, double t_arrival,
                                   const AdaptionSettings& settings, Rng& rng);

/// Adds the record's entries to the overlay and stamps the record with its id.
void apply_adaptions(AdaptionRecord& record, AdaptionOverlay& overlay);

/// Removes exactly the record's entries. Throws UnknownRecordError when the
/// record is not currently applied.
void reverse_adaptions(const AdaptionRecord& record, AdaptionOverlay& overlay);

}  // namespace parksearch
