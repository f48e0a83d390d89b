#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "parksearch/availability.hpp"
#include "parksearch/ids.hpp"

namespace parksearch {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();
inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kWalkingSpeedMps = 1.42;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

/// Great-circle distance on a spherical Earth (haversine), meters.
double great_circle_distance(const GeoPoint& a, const GeoPoint& b);

/// Walking time between two points at 1.42 m/s.
double walking_time(const GeoPoint& from, const GeoPoint& to);

struct Node {
  std::string id;
  GeoPoint position;

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string id;
  NodeIndex from;
  NodeIndex to;
  double length_m = 0.0;
  double drive_time_s = 0.0;
  std::optional<double> speed_limit_kmh;

  bool operator==(const Edge&) const = default;
};

struct Resource {
  std::string id;
  EdgeIndex edge;
  GeoPoint position;
  double offset_s = 0.0;  // drive time from the edge's start node
  double round_trip_s = 0.0;
  std::optional<CtmcParams> ctmc;  // per-resource override of the global rates

  bool operator==(const Resource&) const = default;
};

/// Directed road network with resources attached to edges. Immutable once
/// constructed.
class RoadGraph {
 public:
  RoadGraph() = default;
  /// Validates every structural invariant; throws ValidationError.
  RoadGraph(std::vector<Node> nodes, std::vector<Edge> edges, std::vector<Resource> resources);

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Resource> resources() const { return resources_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t resource_count() const { return resources_.size(); }

  const Node& node(NodeIndex i) const { return nodes_[i.get()]; }
  const Edge& edge(EdgeIndex i) const { return edges_[i.get()]; }
  const Resource& resource(ResourceIndex i) const { return resources_[i.get()]; }

  /// Outgoing edges in ascending index order.
  std::span<const EdgeIndex> out_edges(NodeIndex n) const { return out_edges_[n.get()]; }
  /// Resources on an edge ordered by offset, ties by index.
  std::span<const ResourceIndex> resources_on(EdgeIndex e) const { return on_edge_[e.get()]; }

  /// Node where the take-resource decision for `r` is made.
  NodeIndex decision_node(ResourceIndex r) const { return edge(resource(r).edge).from; }

  std::optional<NodeIndex> find_node(std::string_view id) const;
  std::optional<EdgeIndex> find_edge(std::string_view id) const;
  std::optional<ResourceIndex> find_resource(std::string_view id) const;

  /// Node closest to `p` by great-circle distance; ties to the smallest index.
  NodeIndex nearest_node(const GeoPoint& p) const;

  bool operator==(const RoadGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_ && resources_ == other.resources_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Resource> resources_;
  std::vector<std::vector<EdgeIndex>> out_edges_;
  std::vector<std::vector<ResourceIndex>> on_edge_;
  std::unordered_map<std::string, NodeIndex> node_ids_;
  std::unordered_map<std::string, EdgeIndex> edge_ids_;
  std::unordered_map<std::string, ResourceIndex> resource_ids_;
};

struct GraphLoadOptions {
  /// Fraction of the speed limit actually driven; used only when an edge
  /// gives a speed limit and no drive time.
  double speed_factor = 0.25;
  double default_round_trip_s = 120.0;
};

RoadGraph load_graph(const nlohmann::json& document, const GraphLoadOptions& options = {});
RoadGraph load_graph_file(const std::filesystem::path& path, const GraphLoadOptions& options = {});

/// Inverse of load_graph: drive times and round trips are written out
/// explicitly so a reload does not depend on the load options.
nlohmann::json to_json(const RoadGraph& graph);

/// Dense node-by-node matrix of least drive times, row = origin.
class TravelTimeMatrix {
 public:
  TravelTimeMatrix() = default;
  explicit TravelTimeMatrix(std::size_t n) : n_(n), data_(n * n, kUnreachable) {}

  std::size_t size() const { return n_; }
  double operator()(NodeIndex from, NodeIndex to) const { return data_[from.get() * n_ + to.get()]; }
  double& at(NodeIndex from, NodeIndex to) { return data_[from.get() * n_ + to.get()]; }

  std::span<const double> row(NodeIndex from) const {
    return {data_.data() + from.get() * n_, n_};
  }
  std::span<double> row(NodeIndex from) { return {data_.data() + from.get() * n_, n_}; }

  bool operator==(const TravelTimeMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Nodes from which `around` is reachable within `limit` seconds, ascending.
std::vector<NodeIndex> isochrone_nodes(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                                       NodeIndex around, double limit);

/// Resources on `edge`, ordered by offset.
std::span<const ResourceIndex> reachable_resources(const RoadGraph& graph, EdgeIndex edge);

/// Drive time from `from` to resource `r` (to its decision node, then along
/// its edge up to the offset).
inline double drive_time_to_resource(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                                     NodeIndex from, ResourceIndex r) {
  return matrix(from, graph.decision_node(r)) + graph.resource(r).offset_s;
}

/// First edge of a least-time path from `from` to `to`; nullopt when
/// `from == to` or `to` is unreachable. Ties go to the smallest edge index.
std::optional<EdgeIndex> next_edge_toward(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                                          NodeIndex from, NodeIndex to);

/// Walking time from every resource to `destination`, indexed by resource.
std::vector<double> terminal_costs(const RoadGraph& graph, const GeoPoint& destination);

}  // namespace parksearch
