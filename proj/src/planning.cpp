#include "parksearch/planning.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <string>

#include "parksearch/errors.hpp"

namespace parksearch {

std::string_view to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::random: return "random";
    case PlannerKind::heuristic: return "heuristic";
    case PlannerKind::rpl: return "rpl";
    case PlannerKind::hs: return "hs";
    case PlannerKind::rpl_r: return "rpl_r";
    case PlannerKind::hs_r: return "hs_r";
    case PlannerKind::hs_a: return "hs_a";
  }
  return "unknown";
}

PlannerKind planner_kind_from_string(std::string_view text) {
  for (PlannerKind k : {PlannerKind::random, PlannerKind::heuristic, PlannerKind::rpl, PlannerKind::hs,
                        PlannerKind::rpl_r, PlannerKind::hs_r, PlannerKind::hs_a}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown planner kind '" + std::string(text) + "'");
}

bool PlanningView::treated_available(ResourceIndex r, double arrival) const {
  if (!available_now(r)) return false;
  return reservations == nullptr || !reservations->reserved_before(r, agent, arrival);
}

double PlanningView::predicted_availability(ResourceIndex r, double at) const {
  return availability_probability(belief(r), at, overlay, r, agent);
}

namespace {

Action step_toward_resource(const PlanningView& view, NodeIndex from, ResourceIndex r,
                            bool take_if_adjacent) {
  const RoadGraph& g = *view.graph;
  const NodeIndex decision = g.decision_node(r);
  if (decision == from) {
    if (take_if_adjacent) return TakeResource{r};
    // drive past it and come around again
    return TakeRoad{g.resource(r).edge};
  }
  auto next = next_edge_toward(g, *view.matrix, from, decision);
  if (!next) throw NoPathError("target resource unreachable");
  return TakeRoad{*next};
}

}  // namespace

RouteDecision replan_route(const PlanningView& view, NodeIndex from) {
  const RoadGraph& g = *view.graph;
  std::optional<ResourceIndex> best;
  double best_cost = kUnreachable;
  double best_drive = 0.0;
  bool best_available = false;
  for (std::size_t i = 0; i < g.resource_count(); ++i) {
    const ResourceIndex r(i);
    const double drive = view.drive_to(from, r);
    if (drive == kUnreachable) continue;
    const bool available = view.treated_available(r, view.now + drive);
    const double cost =
        drive + view.terminal_costs[i] + (available ? 0.0 : view.claim_wait[i]);
    if (cost < best_cost) {
      best_cost = cost;
      best = r;
      best_drive = drive;
      best_available = available;
    }
  }
  if (!best) throw NoPathError("no resource reachable from node '" + g.node(from).id + "'");

  RouteDecision decision{step_toward_resource(view, from, *best, best_available)};
  decision.target = best;
  decision.expected_arrival = view.now + best_drive;
  decision.target_treated_available = best_available;
  decision.recomputed = true;
  return decision;
}

RouteDecision replanning_policy_step(const PlanningView& view, AgentState& agent) {
  if (agent.cached && agent.cached->target && agent.cached->target_treated_available) {
    const ResourceIndex target = *agent.cached->target;
    const double drive = view.drive_to(agent.node, target);
    if (drive != kUnreachable && view.treated_available(target, view.now + drive)) {
      RouteDecision follow{step_toward_resource(view, agent.node, target, true)};
      follow.target = target;
      follow.expected_arrival = view.now + drive;
      follow.target_treated_available = true;
      follow.recomputed = false;
      agent.cached = follow;
      return follow;
    }
  }
  RouteDecision fresh = replan_route(view, agent.node);
  agent.cached = fresh;
  return fresh;
}

DeterminizationSet sample_determinizations_seeded(const PlanningView& view, NodeIndex from, int n,
                                                  std::uint64_t base_seed, double depart_time,
                                                  std::optional<double> horizon_s) {
  if (n < 1) throw ConfigError("need at least one determinization");
  const RoadGraph& g = *view.graph;
  DeterminizationSet set;
  set.from = from;
  set.depart_time = depart_time;
  for (std::size_t i = 0; i < g.resource_count(); ++i) {
    const ResourceIndex r(i);
    const double drive = view.drive_to(from, r);
    if (drive == kUnreachable) continue;
    if (horizon_s && drive > *horizon_s) continue;
    set.scope.push_back(r);
    set.drive.push_back(drive);
  }

  // per-resource probabilities and reservation overrides are shared by all futures
  std::vector<double> p(set.scope.size());
  for (std::size_t j = 0; j < set.scope.size(); ++j) {
    const ResourceIndex r = set.scope[j];
    const double arrival = depart_time + set.drive[j];
    const bool reserved =
        view.reservations != nullptr && view.reservations->reserved_before(r, view.agent, arrival);
    p[j] = reserved ? 0.0 : view.predicted_availability(r, arrival);
  }

  set.futures.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Determinization& d = set.futures[static_cast<std::size_t>(k)];
    d.seed = mix_seed(base_seed, static_cast<std::uint64_t>(k));
    Rng rng(d.seed);
    d.available.resize(set.scope.size());
    for (std::size_t j = 0; j < set.scope.size(); ++j) {
      d.available[j] = bernoulli(rng, p[j]) ? 1 : 0;
    }
  }
  return set;
}

DeterminizationSet sample_determinizations(const PlanningView& view, NodeIndex from, int n, Rng& rng,
                                           std::optional<double> depart_time,
                                           std::optional<double> horizon_s) {
  return sample_determinizations_seeded(view, from, n, rng(), depart_time.value_or(view.now),
                                        horizon_s);
}

DeterminizationSolution solve_determinization(const PlanningView& view,
                                              const DeterminizationSet& set, std::size_t k) {
  const Determinization& d = set.futures[k];
  DeterminizationSolution best;
  for (std::size_t j = 0; j < set.scope.size(); ++j) {
    const auto i = set.scope[j].get();
    const double cost =
        set.drive[j] + view.terminal_costs[i] + (d.available[j] ? 0.0 : view.claim_wait[i]);
    if (cost < best.cost) {
      best.cost = cost;
      best.resource = set.scope[j];
      best.arrival = set.depart_time + set.drive[j];
    }
  }
  return best;
}

std::vector<DeterminizationSolution> solve_determinizations(const PlanningView& view,
                                                            const DeterminizationSet& set) {
  const auto n = static_cast<std::int64_t>(set.futures.size());
  std::vector<DeterminizationSolution> out(set.futures.size());
#pragma omp parallel for schedule(static) if (n >= 32)
  for (std::int64_t k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = solve_determinization(view, set, static_cast<std::size_t>(k));
  }
  return out;
}

std::vector<DeterminizationSolution> solve_determinizations_serial(const PlanningView& view,
                                                                   const DeterminizationSet& set) {
  std::vector<DeterminizationSolution> out;
  out.reserve(set.futures.size());
  for (std::size_t k = 0; k < set.futures.size(); ++k) {
    out.push_back(solve_determinization(view, set, k));
  }
  return out;
}

std::optional<std::pair<ResourceIndex, double>> modal_target(
    std::span<const DeterminizationSolution> solutions) {
  std::map<ResourceIndex, std::pair<int, double>> tally;
  for (const auto& s : solutions) {
    if (!s.resource) continue;
    auto& [count, arrival_sum] = tally[*s.resource];
    ++count;
    arrival_sum += s.arrival;
  }
  std::optional<std::pair<ResourceIndex, double>> best;
  int best_count = 0;
  for (const auto& [r, entry] : tally) {
    if (entry.first > best_count) {
      best_count = entry.first;
      best = std::pair{r, entry.second / entry.first};
    }
  }
  return best;
}

RouteDecision hindsight_policy_step(const PlanningView& view, AgentState& agent,
                                    const PlannerSettings& settings, Rng& rng) {
  const RoadGraph& g = *view.graph;
  const NodeIndex node = agent.node;
  // one base seed for every action: common random numbers across successors
  const std::uint64_t base_seed = rng();

  // take-resource actions come first, by resource index, then roads by edge
  // index; a strictly smaller value is needed to displace an earlier action
  std::vector<ResourceIndex> adjacent;
  for (EdgeIndex e : g.out_edges(node)) {
    for (ResourceIndex r : g.resources_on(e)) adjacent.push_back(r);
  }
  std::sort(adjacent.begin(), adjacent.end());

  std::vector<QEstimate> q;
  std::vector<std::vector<DeterminizationSolution>> q_solutions;
  for (ResourceIndex r : adjacent) {
    const double offset = g.resource(r).offset_s;
    if (!view.treated_available(r, view.now + offset)) continue;
    q.push_back({TakeResource{r}, offset + view.terminal_costs[r.get()]});
    q_solutions.emplace_back();
  }
  for (EdgeIndex e : g.out_edges(node)) {
    const Edge& edge = g.edge(e);
    const double depart = view.now + edge.drive_time_s;
    DeterminizationSet set = sample_determinizations_seeded(
        view, edge.to, settings.determinizations, base_seed, depart, settings.hindsight_horizon_s);
    auto sols = settings.parallel_solve ? solve_determinizations(view, set)
                                        : solve_determinizations_serial(view, set);
    double sum = 0.0;
    for (const auto& s : sols) sum += s.cost;
    const double value =
        set.scope.empty() ? kUnreachable : edge.drive_time_s + sum / static_cast<double>(sols.size());
    q.push_back({TakeRoad{e}, value});
    q_solutions.push_back(std::move(sols));
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i].value == kUnreachable) continue;
    if (!best || q[i].value < q[*best].value) best = i;
  }
  if (!best) throw NoPathError("no resource reachable from node '" + g.node(node).id + "'");

  RouteDecision decision{q[*best].action};
  decision.recomputed = true;
  if (const auto* take = std::get_if<TakeResource>(&decision.chosen)) {
    decision.target = take->resource;
    decision.expected_arrival = view.now + g.resource(take->resource).offset_s;
    decision.target_treated_available = true;
  } else {
    decision.solutions = std::move(q_solutions[*best]);
    if (auto mode = modal_target(decision.solutions)) {
      decision.target = mode->first;
      decision.expected_arrival = mode->second;
      decision.target_treated_available =
          view.treated_available(mode->first, mode->second);
    }
  }
  decision.q_estimates = std::move(q);
  agent.cached = decision;
  return decision;
}

namespace {

std::optional<TakeResource> first_available_adjacent(const PlanningView& view, NodeIndex node,
                                                     std::optional<EdgeIndex> preferred) {
  const RoadGraph& g = *view.graph;
  if (preferred && g.edge(*preferred).from == node) {
    for (ResourceIndex r : g.resources_on(*preferred)) {
      if (view.available_now(r)) return TakeResource{r};
    }
  }
  for (EdgeIndex e : g.out_edges(node)) {
    for (ResourceIndex r : g.resources_on(e)) {
      if (view.available_now(r)) return TakeResource{r};
    }
  }
  return std::nullopt;
}

EdgeIndex uniform_edge(std::span<const EdgeIndex> edges, Rng& rng) {
  auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(edges.size()));
  return edges[std::min(k, edges.size() - 1)];
}

}  // namespace

Action random_baseline_policy(const PlanningView& view, AgentState& agent, Rng& rng) {
  const RoadGraph& g = *view.graph;
  const auto out = g.out_edges(agent.node);
  if (out.empty()) throw NoPathError("dead end at node '" + g.node(agent.node).id + "'");

  if (agent.phase == SearchPhase::approach) {
    const NodeIndex street_start =
        agent.destination_edge ? g.edge(*agent.destination_edge).from : agent.destination_node;
    if (agent.node != street_start) {
      if (auto next = next_edge_toward(g, *view.matrix, agent.node, street_start)) {
        return TakeRoad{*next};
      }
    }
    agent.phase = SearchPhase::searching;
    agent.search_started = view.now;
    if (auto take = first_available_adjacent(view, agent.node, agent.destination_edge)) return *take;
    if (agent.destination_edge && g.edge(*agent.destination_edge).from == agent.node) {
      return TakeRoad{*agent.destination_edge};
    }
    return TakeRoad{uniform_edge(out, rng)};
  }
  if (auto take = first_available_adjacent(view, agent.node, std::nullopt)) return *take;
  return TakeRoad{uniform_edge(out, rng)};
}

double heuristic_threshold(const HeuristicSettings& settings, double searching_s) {
  return settings.base_threshold_s + settings.relax_per_minute_s * std::max(0.0, searching_s) / 60.0;
}

Action heuristic_driver_policy(const PlanningView& view, AgentState& agent,
                               const HeuristicSettings& settings, Rng& rng) {
  const RoadGraph& g = *view.graph;
  const auto out = g.out_edges(agent.node);
  if (out.empty()) throw NoPathError("dead end at node '" + g.node(agent.node).id + "'");

  const double far_walk_s = settings.far_radius_m / kWalkingSpeedMps;
  const bool far = walking_time(g.node(agent.node).position, agent.destination) > far_walk_s;
  if (far) {
    if (auto next = next_edge_toward(g, *view.matrix, agent.node, agent.destination_node)) {
      return TakeRoad{*next};
    }
    return TakeRoad{uniform_edge(out, rng)};
  }

  if (agent.phase == SearchPhase::approach) {
    agent.phase = SearchPhase::searching;
    agent.search_started = view.now;
  }
  const double threshold = heuristic_threshold(settings, view.now - agent.search_started);
  std::optional<ResourceIndex> pick;
  for (EdgeIndex e : out) {
    for (ResourceIndex r : g.resources_on(e)) {
      if (!view.available_now(r)) continue;
      const double walk = view.terminal_costs[r.get()];
      if (walk > threshold) continue;
      if (!pick || walk < view.terminal_costs[pick->get()]) pick = r;
    }
  }
  if (pick) return TakeResource{*pick};

  if (agent.node != agent.destination_node) {
    if (auto next = next_edge_toward(g, *view.matrix, agent.node, agent.destination_node)) {
      return TakeRoad{*next};
    }
  }
  // circle: random street that stays near the destination, avoiding U-turns
  std::vector<EdgeIndex> near;
  for (EdgeIndex e : out) {
    const Edge& edge = g.edge(e);
    if (walking_time(g.node(edge.to).position, agent.destination) > far_walk_s) continue;
    if (agent.last_edge && g.edge(*agent.last_edge).from == edge.to && out.size() > 1) continue;
    near.push_back(e);
  }
  if (near.empty()) return TakeRoad{uniform_edge(out, rng)};
  return TakeRoad{uniform_edge(near, rng)};
}

RouteDecision decide(PlannerKind kind, const PlanningView& view, AgentState& agent,
                     const PlannerSettings& settings, Rng& rng) {
  auto wrap = [&](Action a) {
    RouteDecision d{a};
    if (const auto* take = std::get_if<TakeResource>(&a)) {
      d.target = take->resource;
      d.expected_arrival = view.now + view.graph->resource(take->resource).offset_s;
      d.target_treated_available = true;
    }
    d.recomputed = true;
    return d;
  };
  switch (kind) {
    case PlannerKind::random: return wrap(random_baseline_policy(view, agent, rng));
    case PlannerKind::heuristic:
      return wrap(heuristic_driver_policy(view, agent, settings.heuristic, rng));
    case PlannerKind::rpl:
    case PlannerKind::rpl_r: return replanning_policy_step(view, agent);
    case PlannerKind::hs:
    case PlannerKind::hs_r:
    case PlannerKind::hs_a: return hindsight_policy_step(view, agent, settings, rng);
  }
  throw ConfigError("unhandled planner kind");
}

bool action_valid_at(const RoadGraph& graph, NodeIndex node, const Action& action) {
  if (const auto* road = std::get_if<TakeRoad>(&action)) {
    return road->edge.get() < graph.edge_count() && graph.edge(road->edge).from == node;
  }
  const auto& take = std::get<TakeResource>(action);
  return take.resource.get() < graph.resource_count() && graph.decision_node(take.resource) == node;
}

}  // namespace parksearch
