#include "parksearch/fleet.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "parksearch/errors.hpp"

namespace parksearch {

std::optional<Reservation> hindsight_reservation(const PlanningView& view,
                                                 std::span<const DeterminizationSolution> solutions,
                                                 AgentId agent, const Action& current) {
  if (const auto* take = std::get_if<TakeResource>(&current)) {
    return Reservation{take->resource, agent,
                       view.now + view.graph->resource(take->resource).offset_s};
  }
  auto mode = modal_target(solutions);
  if (!mode) return std::nullopt;
  return Reservation{mode->first, agent, mode->second};
}

double edge_vacancy_probability(const PlanningView& view, EdgeIndex edge, double t) {
  double all_occupied = 1.0;
  for (ResourceIndex r : view.graph->resources_on(edge)) {
    all_occupied *= 1.0 - view.predicted_availability(r, t);
  }
  return 1.0 - all_occupied;
}

double distance_factor(const PlanningView& view, EdgeIndex edge, ResourceIndex target,
                       const AdaptionSettings& settings) {
  const double to_target = view.drive_to(view.graph->edge(edge).to, target);
  return std::clamp(to_target / settings.isochrone_s, settings.min_distance_factor, 1.0);
}

double jump_weight(const PlanningView& view, EdgeIndex edge, double t, bool visited,
                   ResourceIndex target, const AdaptionSettings& settings) {
  const double decay = visited ? settings.visit_decay : 1.0;
  return decay * distance_factor(view, edge, target, settings) *
         edge_vacancy_probability(view, edge, t);
}

std::vector<WalkPath> biased_random_walks(const PlanningView& view, ResourceIndex target,
                                          double t_arrival, const AdaptionSettings& settings,
                                          Rng& rng) {
  if (settings.samples < 1) throw ConfigError("adaption.samples must be at least 1");
  if (!(settings.isochrone_s > 0.0)) throw ConfigError("adaption.isochrone_s must be positive");

  const RoadGraph& g = *view.graph;
  const Resource& tr = g.resource(target);
  const Edge& target_edge = g.edge(tr.edge);
  const NodeIndex start = target_edge.to;
  if (g.out_edges(start).empty()) {
    throw DegenerateTargetError("target '" + tr.id + "' leads into a dead end");
  }

  std::vector<std::uint8_t> inside(g.node_count(), 0);
  for (NodeIndex v : isochrone_nodes(g, *view.matrix, target_edge.from, settings.isochrone_s)) {
    inside[v.get()] = 1;
  }

  const double p_target = view.predicted_availability(target, t_arrival);
  const double initial = settings.initial_available ? p_target : 1.0 - p_target;
  const double t_partial = target_edge.drive_time_s - tr.offset_s;

  std::vector<WalkPath> paths;
  paths.reserve(static_cast<std::size_t>(settings.samples));
  std::vector<EdgeIndex> candidates;
  std::vector<double> weights;
  for (int i = 0; i < settings.samples; ++i) {
    WalkPath path;
    path.path_probability = initial;
    path.accumulated_time = t_arrival + t_partial;
    std::unordered_set<EdgeIndex> visited;
    NodeIndex node = start;
    for (int step = 0; step < settings.max_steps; ++step) {
      candidates.clear();
      weights.clear();
      double total = 0.0;
      for (EdgeIndex e : g.out_edges(node)) {
        if (!inside[g.edge(e).to.get()]) continue;
        const double w =
            jump_weight(view, e, path.accumulated_time, visited.contains(e), target, settings);
        candidates.push_back(e);
        weights.push_back(w);
        total += w;
      }
      if (candidates.empty() || !(total > 0.0)) break;

      // intervals of the normalized weights scaled by P_path: a draw beyond
      // P_path ends the walk, so it stops with probability 1 - P_path
      const double u = uniform01(rng);
      if (!(u < path.path_probability)) break;
      const double scaled = u / path.path_probability * total;
      std::size_t k = 0;
      double cumulative = weights[0];
      while (k + 1 < candidates.size() && scaled >= cumulative) {
        ++k;
        cumulative += weights[k];
      }
      if (weights[k] == 0.0) break;

      const EdgeIndex chosen = candidates[k];
      path.path_probability *= weights[k];
      path.accumulated_time += g.edge(chosen).drive_time_s;
      path.edges.push_back(chosen);
      visited.insert(chosen);
      node = g.edge(chosen).to;
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

AdaptionRecord create_adaptions(const RoadGraph& graph, std::span<const WalkPath> paths,
                                AgentId owner, std::optional<EdgeIndex> start_edge) {
  struct Group {
    double time_sum = 0.0;
    double probability_sum = 0.0;
    int count = 0;
  };
  std::map<EdgeIndex, Group> groups;
  for (const WalkPath& p : paths) {
    if (p.edges.empty() && !start_edge) continue;
    Group& g = groups[p.edges.empty() ? *start_edge : p.edges.back()];
    g.time_sum += p.accumulated_time;
    g.probability_sum += p.path_probability;
    ++g.count;
  }
  AdaptionRecord record;
  record.owner = owner;
  for (const auto& [edge, group] : groups) {
    const auto resources = graph.resources_on(edge);
    if (resources.empty()) continue;
    const double mean_time = group.time_sum / group.count;
    const double mean_probability = group.probability_sum / group.count;
    const double share = mean_probability / static_cast<double>(resources.size());
    for (ResourceIndex r : resources) record.entries.push_back({r, mean_time, share});
  }
  return record;
}

AdaptionRecord adapt_probabilities(const PlanningView& view, ResourceIndex target, double t_arrival,
                                   const AdaptionSettings& settings, Rng& rng) {
  const auto paths = biased_random_walks(view, target, t_arrival, settings, rng);
  std::optional<EdgeIndex> start_edge;
  if (settings.stopped_walks_on_target) start_edge = view.graph->resource(target).edge;
  return create_adaptions(*view.graph, paths, view.agent, start_edge);
}

void apply_adaptions(AdaptionRecord& record, AdaptionOverlay& overlay) {
  record.id = overlay.open_record();
  for (const AdaptionEntry& e : record.entries) {
    overlay.add(e.resource, {e.activation_time, e.delta, record.owner, record.id});
  }
}

void reverse_adaptions(const AdaptionRecord& record, AdaptionOverlay& overlay) {
  if (record.id == 0 || !overlay.has_record(record.id)) {
    throw UnknownRecordError("adaption record is not applied");
  }
  overlay.remove_record(record.id);
}

}  // namespace parksearch
