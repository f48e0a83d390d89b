#pragma once

// Builders and small generators shared by the unit tests.

#include <functional>
#include <string>
#include <vector>

#include "parksearch/availability.hpp"
#include "parksearch/errors.hpp"
#include "parksearch/planning.hpp"
#include "parksearch/road_graph.hpp"
#include "parksearch/shortest_paths.hpp"
#include "parksearch/simulation.hpp"

namespace parksearch::testing {

// Small graphs are laid out along the equator; 0.001 degrees of longitude is
// about 111 m.
class GraphBuilder {
 public:
  NodeIndex node(double lon = 0.0, double lat = 0.0) {
    nodes_.push_back({"n" + std::to_string(nodes_.size()), {lat, lon}});
    return NodeIndex(nodes_.size() - 1);
  }

  EdgeIndex edge(NodeIndex from, NodeIndex to, double drive_s, double length_m = 100.0) {
    edges_.push_back({"e" + std::to_string(edges_.size()), from, to, length_m, drive_s, std::nullopt});
    return EdgeIndex(edges_.size() - 1);
  }

  /// Resource at `offset_s` along `e`, placed at the edge's start node unless
  /// a position is given.
  ResourceIndex resource(EdgeIndex e, double offset_s, std::optional<GeoPoint> where = std::nullopt,
                         double round_trip_s = 120.0) {
    const GeoPoint p = where.value_or(nodes_[edges_[e.get()].from.get()].position);
    resources_.push_back({"r" + std::to_string(resources_.size()), e, p, offset_s, round_trip_s, std::nullopt});
    return ResourceIndex(resources_.size() - 1);
  }

  RoadGraph build() const { return RoadGraph(nodes_, edges_, resources_); }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Resource> resources_;
};

/// Owns everything a PlanningView points to.
struct ViewFixture {
  RoadGraph graph;
  TravelTimeMatrix matrix;
  std::vector<ResourceState> states;
  std::vector<CtmcParams> params;
  std::vector<double> claim_wait;
  std::vector<double> terminal;
  ReservationTable reservations;
  AdaptionOverlay overlay;

  ViewFixture(RoadGraph g, GeoPoint destination, CtmcParams ctmc = {})
      : graph(std::move(g)),
        matrix(all_pairs_travel_times(graph)),
        states(graph.resource_count(), ResourceState::available),
        params(resource_params(graph, ctmc)),
        claim_wait(resource_claim_waits(graph, params)),
        terminal(terminal_costs(graph, destination)) {}

  PlanningView view(double now = 0.0, AgentId agent = AgentId(0), bool with_reservations = false,
                    bool with_overlay = false) const {
    PlanningView v;
    v.graph = &graph;
    v.matrix = &matrix;
    v.states = states;
    v.params = params;
    v.claim_wait = claim_wait;
    v.terminal_costs = terminal;
    v.reservations = with_reservations ? &reservations : nullptr;
    v.overlay = with_overlay ? &overlay : nullptr;
    v.agent = agent;
    v.now = now;
    return v;
  }
};

/// Hand-rolled property runner: `body` gets an independent generator and the
/// case index for each case.
inline void for_all(int cases, std::uint64_t seed, const std::function<void(Rng&, int)>& body) {
  for (int i = 0; i < cases; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    body(rng, i);
  }
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Random directed graph with integer drive times so shortest paths are exact.
inline RoadGraph random_graph(Rng& rng, int nodes, int edges, int resources) {
  GraphBuilder b;
  for (int i = 0; i < nodes; ++i) b.node(uniform_real(rng, 0.0, 0.01), uniform_real(rng, 0.0, 0.01));
  std::vector<EdgeIndex> made;
  for (int i = 0; i < edges; ++i) {
    const int u = uniform_int(rng, 0, nodes - 1);
    int v = uniform_int(rng, 0, nodes - 2);
    if (v >= u) ++v;
    made.push_back(b.edge(NodeIndex(u), NodeIndex(v), uniform_int(rng, 1, 60)));
  }
  for (int i = 0; i < resources && !made.empty(); ++i) {
    b.resource(made[rng() % made.size()], 0.0,
               GeoPoint{uniform_real(rng, 0.0, 0.01), uniform_real(rng, 0.0, 0.01)});
  }
  return b.build();
}

}  // namespace parksearch::testing
