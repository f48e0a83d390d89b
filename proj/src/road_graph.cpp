#include "parksearch/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "parksearch/errors.hpp"

namespace parksearch {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_position(const GeoPoint& p, const std::string& what) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
    throw ValidationError(what + ": coordinates out of range");
  }
}

using json = nlohmann::json;

void reject_unknown_fields(const json& object, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  if (!object.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(where + ": unknown field '" + key + "'");
    }
  }
}

template <class T>
T required(const json& object, const char* key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
std::optional<T> optional_field(const json& object, const char* key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

const json& required_array(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    throw ParseError(std::string("graph document: missing array '") + key + "'");
  }
  return *it;
}

}  // namespace

double great_circle_distance(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = lat2 - lat1;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s = std::sin(dlat / 2.0);
  const double t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(lat1) * std::cos(lat2) * t * t;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double walking_time(const GeoPoint& from, const GeoPoint& to) {
  return great_circle_distance(from, to) / kWalkingSpeedMps;
}

RoadGraph::RoadGraph(std::vector<Node> nodes, std::vector<Edge> edges,
                     std::vector<Resource> resources)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), resources_(std::move(resources)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    check_position(n.position, "node '" + n.id + "'");
    if (!node_ids_.emplace(n.id, NodeIndex(i)).second) {
      throw ValidationError("duplicate node id '" + n.id + "'");
    }
  }
  out_edges_.resize(nodes_.size());
  on_edge_.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.from.get() >= nodes_.size() || e.to.get() >= nodes_.size()) {
      throw ValidationError("edge '" + e.id + "' references a missing node");
    }
    if (!(e.length_m > 0.0)) throw ValidationError("edge '" + e.id + "' has non-positive length");
    if (!(e.drive_time_s > 0.0) || !std::isfinite(e.drive_time_s)) {
      throw ValidationError("edge '" + e.id + "' has non-positive drive time");
    }
    if (!edge_ids_.emplace(e.id, EdgeIndex(i)).second) {
      throw ValidationError("duplicate edge id '" + e.id + "'");
    }
    out_edges_[e.from.get()].push_back(EdgeIndex(i));
  }
  for (std::size_t i = 0; i < resources_.size(); ++i) {
    const Resource& r = resources_[i];
    if (r.edge.get() >= edges_.size()) {
      throw ValidationError("resource '" + r.id + "' is attached to a missing edge");
    }
    check_position(r.position, "resource '" + r.id + "'");
    const Edge& e = edges_[r.edge.get()];
    if (!(r.offset_s >= 0.0) || r.offset_s > e.drive_time_s) {
      throw ValidationError("resource '" + r.id + "' offset outside its edge");
    }
    if (!(r.round_trip_s > 0.0)) {
      throw ValidationError("resource '" + r.id + "' has non-positive round trip time");
    }
    if (r.ctmc && !(r.ctmc->lambda > 0.0 && r.ctmc->mu > 0.0)) {
      throw ValidationError("resource '" + r.id + "' has non-positive rates");
    }
    if (!resource_ids_.emplace(r.id, ResourceIndex(i)).second) {
      throw ValidationError("duplicate resource id '" + r.id + "'");
    }
    on_edge_[r.edge.get()].push_back(ResourceIndex(i));
  }
  for (auto& list : on_edge_) {
    std::stable_sort(list.begin(), list.end(), [this](ResourceIndex a, ResourceIndex b) {
      return resources_[a.get()].offset_s < resources_[b.get()].offset_s;
    });
  }
}

std::optional<NodeIndex> RoadGraph::find_node(std::string_view id) const {
  auto it = node_ids_.find(std::string(id));
  if (it == node_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> RoadGraph::find_edge(std::string_view id) const {
  auto it = edge_ids_.find(std::string(id));
  if (it == edge_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<ResourceIndex> RoadGraph::find_resource(std::string_view id) const {
  auto it = resource_ids_.find(std::string(id));
  if (it == resource_ids_.end()) return std::nullopt;
  return it->second;
}

NodeIndex RoadGraph::nearest_node(const GeoPoint& p) const {
  NodeIndex best;
  double best_d = kUnreachable;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double d = great_circle_distance(nodes_[i].position, p);
    if (d < best_d) {
      best_d = d;
      best = NodeIndex(i);
    }
  }
  return best;
}

RoadGraph load_graph(const json& doc, const GraphLoadOptions& options) {
  reject_unknown_fields(doc, {"nodes", "edges", "resources"}, "graph document");

  std::vector<Node> nodes;
  std::unordered_map<std::string, NodeIndex> node_ids;
  for (const json& item : required_array(doc, "nodes")) {
    reject_unknown_fields(item, {"id", "lat", "lon"}, "node");
    Node n{required<std::string>(item, "id", "node"),
           {required<double>(item, "lat", "node"), required<double>(item, "lon", "node")}};
    node_ids.emplace(n.id, NodeIndex(nodes.size()));
    nodes.push_back(std::move(n));
  }

  std::vector<Edge> edges;
  std::unordered_map<std::string, EdgeIndex> edge_ids;
  for (const json& item : required_array(doc, "edges")) {
    reject_unknown_fields(
        item, {"id", "from", "to", "length_m", "speed_limit_kmh", "drive_time_s", "self_loop"},
        "edge");
    Edge e;
    e.id = required<std::string>(item, "id", "edge");
    const std::string where = "edge '" + e.id + "'";
    const auto from = required<std::string>(item, "from", where);
    const auto to = required<std::string>(item, "to", where);
    auto f = node_ids.find(from);
    auto t = node_ids.find(to);
    if (f == node_ids.end() || t == node_ids.end()) {
      throw ValidationError(where + " references unknown node '" +
                            (f == node_ids.end() ? from : to) + "'");
    }
    e.from = f->second;
    e.to = t->second;
    if (e.from == e.to && !optional_field<bool>(item, "self_loop", where).value_or(false)) {
      throw ValidationError(where + " is an undeclared self-loop");
    }
    e.length_m = required<double>(item, "length_m", where);
    e.speed_limit_kmh = optional_field<double>(item, "speed_limit_kmh", where);
    if (auto drive = optional_field<double>(item, "drive_time_s", where)) {
      e.drive_time_s = *drive;
    } else if (e.speed_limit_kmh) {
      if (!(*e.speed_limit_kmh > 0.0)) throw ValidationError(where + " has non-positive speed limit");
      const double speed_mps = *e.speed_limit_kmh / 3.6;
      e.drive_time_s = e.length_m / (options.speed_factor * speed_mps);
    } else {
      throw ParseError(where + ": needs drive_time_s or speed_limit_kmh");
    }
    edge_ids.emplace(e.id, EdgeIndex(edges.size()));
    edges.push_back(std::move(e));
  }

  std::vector<Resource> resources;
  if (doc.contains("resources")) {
    for (const json& item : required_array(doc, "resources")) {
      reject_unknown_fields(item,
                            {"id", "edge", "lat", "lon", "offset_s", "round_trip_s", "lambda_inv_s",
                             "mu_inv_s"},
                            "resource");
      Resource r;
      r.id = required<std::string>(item, "id", "resource");
      const std::string where = "resource '" + r.id + "'";
      const auto edge = required<std::string>(item, "edge", where);
      auto it = edge_ids.find(edge);
      if (it == edge_ids.end()) throw ValidationError(where + " references unknown edge '" + edge + "'");
      r.edge = it->second;
      r.position = {required<double>(item, "lat", where), required<double>(item, "lon", where)};
      r.offset_s = required<double>(item, "offset_s", where);
      r.round_trip_s =
          optional_field<double>(item, "round_trip_s", where).value_or(options.default_round_trip_s);
      auto lambda_inv = optional_field<double>(item, "lambda_inv_s", where);
      auto mu_inv = optional_field<double>(item, "mu_inv_s", where);
      if (lambda_inv.has_value() != mu_inv.has_value()) {
        throw ParseError(where + ": lambda_inv_s and mu_inv_s must be given together");
      }
      if (lambda_inv) {
        if (!(*lambda_inv > 0.0 && *mu_inv > 0.0)) {
          throw ValidationError(where + " has non-positive sojourn means");
        }
        r.ctmc = CtmcParams::from_mean_sojourns(*lambda_inv, *mu_inv);
      }
      resources.push_back(std::move(r));
    }
  }
  return RoadGraph(std::move(nodes), std::move(edges), std::move(resources));
}

RoadGraph load_graph_file(const std::filesystem::path& path, const GraphLoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("graph file " + path.string() + ": " + e.what());
  }
  return load_graph(doc, options);
}

json to_json(const RoadGraph& graph) {
  json nodes = json::array();
  for (const Node& n : graph.nodes()) {
    nodes.push_back({{"id", n.id}, {"lat", n.position.lat}, {"lon", n.position.lon}});
  }
  json edges = json::array();
  for (const Edge& e : graph.edges()) {
    json item = {{"id", e.id},
                 {"from", graph.node(e.from).id},
                 {"to", graph.node(e.to).id},
                 {"length_m", e.length_m},
                 {"drive_time_s", e.drive_time_s}};
    if (e.speed_limit_kmh) item["speed_limit_kmh"] = *e.speed_limit_kmh;
    if (e.from == e.to) item["self_loop"] = true;
    edges.push_back(std::move(item));
  }
  json resources = json::array();
  for (const Resource& r : graph.resources()) {
    json item = {{"id", r.id},
                 {"edge", graph.edge(r.edge).id},
                 {"lat", r.position.lat},
                 {"lon", r.position.lon},
                 {"offset_s", r.offset_s},
                 {"round_trip_s", r.round_trip_s}};
    if (r.ctmc) {
      item["lambda_inv_s"] = 1.0 / r.ctmc->lambda;
      item["mu_inv_s"] = 1.0 / r.ctmc->mu;
    }
    resources.push_back(std::move(item));
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"resources", std::move(resources)}};
}

std::vector<NodeIndex> isochrone_nodes(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                                       NodeIndex around, double limit) {
  if (limit < 0.0) throw ConfigError("isochrone limit must be non-negative");
  std::vector<NodeIndex> out;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    if (matrix(NodeIndex(v), around) <= limit) out.emplace_back(v);
  }
  return out;
}

std::span<const ResourceIndex> reachable_resources(const RoadGraph& graph, EdgeIndex edge) {
  return graph.resources_on(edge);
}

std::optional<EdgeIndex> next_edge_toward(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                                          NodeIndex from, NodeIndex to) {
  if (from == to) return std::nullopt;
  std::optional<EdgeIndex> best;
  double best_cost = kUnreachable;
  for (EdgeIndex e : graph.out_edges(from)) {
    const Edge& edge = graph.edge(e);
    const double cost = edge.drive_time_s + matrix(edge.to, to);
    if (cost < best_cost) {
      best_cost = cost;
      best = e;
    }
  }
  return best;
}

std::vector<double> terminal_costs(const RoadGraph& graph, const GeoPoint& destination) {
  std::vector<double> out;
  out.reserve(graph.resource_count());
  for (const Resource& r : graph.resources()) out.push_back(walking_time(r.position, destination));
  return out;
}

}  // namespace parksearch
