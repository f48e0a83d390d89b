#include "parksearch/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <omp.h>

#include "parksearch/errors.hpp"
#include "parksearch/shortest_paths.hpp"

namespace parksearch {

namespace fs = std::filesystem;
using nlohmann::json;

// ------------------------------------------------------------ synthetic grid

RoadGraph make_grid_graph(const GridSpec& spec, Rng& rng) {
  if (spec.rows < 2 || spec.cols < 2) throw ConfigError("grid needs at least 2 rows and 2 columns");
  if (!(spec.block_m > 0.0) || !(spec.speed_kmh > 0.0)) throw ConfigError("grid block and speed must be positive");
  if (spec.resources < 0) throw ConfigError("grid resource count must be non-negative");

  const double meters_per_degree = kEarthRadiusM * std::numbers::pi / 180.0;
  const double dlat = spec.block_m / meters_per_degree;
  const double dlon = dlat / std::cos(spec.origin.lat * std::numbers::pi / 180.0);

  std::vector<Node> nodes;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      nodes.push_back({"n" + std::to_string(r) + "_" + std::to_string(c),
                       {spec.origin.lat + r * dlat, spec.origin.lon + c * dlon}});
    }
  }
  const auto at = [&](int r, int c) { return static_cast<std::size_t>(r * spec.cols + c); };
  if (!(spec.speed_factor > 0.0)) throw ConfigError("grid speed factor must be positive");
  const double speed = spec.speed_factor * spec.speed_kmh / 3.6;

  std::vector<Edge> edges;
  const auto connect = [&](std::size_t a, std::size_t b) {
    for (auto [u, v] : {std::pair{a, b}, std::pair{b, a}}) {
      const double length = great_circle_distance(nodes[u].position, nodes[v].position);
      edges.push_back({"e_" + nodes[u].id + "_" + nodes[v].id, NodeIndex(u), NodeIndex(v), length,
                       length / speed, spec.speed_kmh});
    }
  };
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (c + 1 < spec.cols) connect(at(r, c), at(r, c + 1));
      if (r + 1 < spec.rows) connect(at(r, c), at(r + 1, c));
    }
  }

  const double round_trip = spec.round_trip_s > 0.0 ? spec.round_trip_s : 4.0 * spec.block_m / speed;
  std::vector<Resource> resources;
  for (int i = 0; i < spec.resources; ++i) {
    const std::size_t e = rng() % edges.size();
    const double frac = 0.05 + 0.9 * uniform01(rng);
    const Edge& edge = edges[e];
    const GeoPoint& a = nodes[edge.from.get()].position;
    const GeoPoint& b = nodes[edge.to.get()].position;
    resources.push_back({"r" + std::to_string(i), EdgeIndex(e),
                         {a.lat + frac * (b.lat - a.lat), a.lon + frac * (b.lon - a.lon)},
                         frac * edge.drive_time_s, round_trip, std::nullopt});
  }
  return RoadGraph(std::move(nodes), std::move(edges), std::move(resources));
}

// -------------------------------------------------------------- clustering

std::vector<Cluster> dbscan(std::span<const GeoPoint> points, double eps_m, int min_pts) {
  if (!(eps_m > 0.0)) throw ConfigError("dbscan eps must be positive");
  if (min_pts < 1) throw ConfigError("dbscan min_pts must be at least 1");
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i].push_back(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (great_circle_distance(points[i], points[j]) <= eps_m) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  constexpr int kUnassigned = -1;
  std::vector<int> label(n, kUnassigned);
  int next = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != kUnassigned || neighbors[seed].size() < static_cast<std::size_t>(min_pts)) continue;
    const int cluster = next++;
    std::deque<std::size_t> frontier{seed};
    label[seed] = cluster;
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      if (neighbors[p].size() < static_cast<std::size_t>(min_pts)) continue;  // border
      for (std::size_t q : neighbors[p]) {
        if (label[q] != kUnassigned) continue;
        label[q] = cluster;
        frontier.push_back(q);
      }
    }
  }
  std::vector<Cluster> out(static_cast<std::size_t>(next));
  for (int c = 0; c < next; ++c) out[c].label = c;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kUnassigned) continue;
    out[label[i]].members.push_back(i);
    out[label[i]].points.push_back(points[i]);
  }
  return out;
}

// ------------------------------------------------------------------ config

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
  return get_or<T>(obj, key, T{});
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

GridSpec parse_grid(const json& g, std::uint64_t& seed) {
  check_keys(g, {"rows", "cols", "block_m", "speed_kmh", "resources", "round_trip_s", "origin", "seed"}, "graph.grid");
  GridSpec spec;
  spec.rows = get_or(g, "rows", spec.rows);
  spec.cols = get_or(g, "cols", spec.cols);
  spec.block_m = get_or(g, "block_m", spec.block_m);
  spec.speed_kmh = get_or(g, "speed_kmh", spec.speed_kmh);
  spec.resources = get_or(g, "resources", spec.resources);
  spec.round_trip_s = get_or(g, "round_trip_s", spec.round_trip_s);
  if (g.contains("origin")) {
    const json& o = g.at("origin");
    check_keys(o, {"lat", "lon"}, "graph.grid.origin");
    spec.origin = {require<double>(o, "lat", "origin"), require<double>(o, "lon", "origin")};
  }
  seed = get_or<std::uint64_t>(g, "seed", seed);
  return spec;
}

GeoPoint parse_point(const json& obj, const std::string& where) {
  return {require<double>(obj, "lat", where), require<double>(obj, "lon", where)};
}

}  // namespace

ScenarioConfig parse_scenario_config(const json& doc, const fs::path& base_dir) {
  check_keys(doc,
             {"name", "graph", "speed_factor", "default_round_trip_s", "occupations", "ctmc", "destinations",
              "planners", "hs", "heuristic", "adaption", "seeds", "horizon_s", "record_wall_clock"},
             "config");
  ScenarioConfig c;
  c.name = get_or<std::string>(doc, "name", c.name);

  if (!doc.contains("graph")) throw ConfigError("config is missing 'graph'");
  const json& g = doc.at("graph");
  if (g.is_string()) {
    c.graph_path = resolve(base_dir, g.get<std::string>());
    if (!fs::exists(*c.graph_path)) throw ConfigError("graph file not found: " + c.graph_path->string());
  } else {
    check_keys(g, {"grid"}, "graph");
    c.grid = parse_grid(require<json>(g, "grid", "graph"), c.grid_seed);
  }
  c.graph_options.speed_factor = get_or(doc, "speed_factor", c.graph_options.speed_factor);
  if (c.grid) c.grid->speed_factor = c.graph_options.speed_factor;
  c.graph_options.default_round_trip_s = get_or(doc, "default_round_trip_s", c.graph_options.default_round_trip_s);

  if (doc.contains("occupations")) {
    const json& o = doc.at("occupations");
    check_keys(o, {"trace", "synthetic"}, "occupations");
    if (o.contains("trace") == o.contains("synthetic")) {
      throw ConfigError("occupations needs exactly one of 'trace' or 'synthetic'");
    }
    if (o.contains("trace")) {
      c.occupations.trace = resolve(base_dir, o.at("trace").get<std::string>());
      if (!fs::exists(*c.occupations.trace)) throw ConfigError("trace file not found: " + c.occupations.trace->string());
    } else {
      const json& s = o.at("synthetic");
      check_keys(s, {"horizon_s"}, "occupations.synthetic");
      if (s.contains("horizon_s")) c.occupations.synthetic_horizon_s = s.at("horizon_s").get<double>();
    }
  }

  if (doc.contains("ctmc")) {
    const json& m = doc.at("ctmc");
    check_keys(m, {"lambda_inv_s", "mu_inv_s"}, "ctmc");
    c.ctmc = CtmcParams::from_mean_sojourns(get_or(m, "lambda_inv_s", 120.0), get_or(m, "mu_inv_s", 2091.0));
  }

  if (!doc.contains("destinations")) throw ConfigError("config is missing 'destinations'");
  const json& d = doc.at("destinations");
  const std::string mode = require<std::string>(d, "mode", "destinations");
  if (mode == "single") {
    check_keys(d, {"mode", "start_node", "lat", "lon", "agents", "start_time"}, "destinations");
    c.destinations.mode = DestinationConfig::Mode::single;
    auto& s = c.destinations.single;
    s.start_node = require<std::string>(d, "start_node", "destinations");
    s.destination = parse_point(d, "destinations");
    s.agents = get_or(d, "agents", s.agents);
    s.start_time = get_or(d, "start_time", s.start_time);
  } else if (mode == "data_driven") {
    check_keys(d, {"mode", "start_node", "eps_m", "min_pts", "hours", "clusters"}, "destinations");
    c.destinations.mode = DestinationConfig::Mode::data_driven;
    auto& s = c.destinations.data_driven;
    s.start_node = require<std::string>(d, "start_node", "destinations");
    s.eps_m = require<double>(d, "eps_m", "destinations");
    s.min_pts = require<int>(d, "min_pts", "destinations");
    if (d.contains("hours")) s.hours = d.at("hours").get<std::vector<int>>();
    if (d.contains("clusters")) s.clusters = d.at("clusters").get<int>();
  } else if (mode == "explicit") {
    check_keys(d, {"mode", "agents"}, "destinations");
    c.destinations.mode = DestinationConfig::Mode::explicit_list;
    for (const json& a : require<json>(d, "agents", "destinations")) {
      check_keys(a, {"start_node", "lat", "lon", "start_time"}, "destinations.agents[]");
      c.destinations.agents.push_back({require<std::string>(a, "start_node", "agent"), parse_point(a, "agent"),
                                       get_or(a, "start_time", 0.0)});
    }
    if (c.destinations.agents.empty()) throw ConfigError("explicit destinations need at least one agent");
  } else {
    throw ConfigError("unknown destination mode '" + mode + "'");
  }

  if (doc.contains("planners")) {
    c.planners.clear();
    for (const json& p : doc.at("planners")) {
      try {
        c.planners.push_back(planner_kind_from_string(p.get<std::string>()));
      } catch (const ParseError& e) {
        throw ConfigError(e.what());
      }
    }
    if (c.planners.empty()) throw ConfigError("planners must not be empty");
  }

  if (doc.contains("hs")) {
    const json& h = doc.at("hs");
    check_keys(h, {"determinizations", "horizon_s", "parallel"}, "hs");
    c.planner.determinizations = get_or(h, "determinizations", c.planner.determinizations);
    if (h.contains("horizon_s")) c.planner.hindsight_horizon_s = h.at("horizon_s").get<double>();
    c.planner.parallel_solve = get_or(h, "parallel", c.planner.parallel_solve);
    if (c.planner.determinizations < 1) throw ConfigError("hs.determinizations must be at least 1");
  }
  if (doc.contains("heuristic")) {
    const json& h = doc.at("heuristic");
    check_keys(h, {"far_radius_m", "base_threshold_s", "relax_per_minute_s"}, "heuristic");
    auto& s = c.planner.heuristic;
    s.far_radius_m = get_or(h, "far_radius_m", s.far_radius_m);
    s.base_threshold_s = get_or(h, "base_threshold_s", s.base_threshold_s);
    s.relax_per_minute_s = get_or(h, "relax_per_minute_s", s.relax_per_minute_s);
  }
  if (doc.contains("adaption")) {
    const json& a = doc.at("adaption");
    check_keys(a, {"samples", "isochrone_s", "visit_decay", "min_distance_factor", "with_reservations",
                    "initial_available", "stopped_walks_on_target"},
               "adaption");
    c.adaption.samples = get_or(a, "samples", c.adaption.samples);
    c.adaption.isochrone_s = get_or(a, "isochrone_s", c.adaption.isochrone_s);
    c.adaption.visit_decay = get_or(a, "visit_decay", c.adaption.visit_decay);
    c.adaption.min_distance_factor = get_or(a, "min_distance_factor", c.adaption.min_distance_factor);
    c.adaption_with_reservations = get_or(a, "with_reservations", c.adaption_with_reservations);
    c.adaption.initial_available = get_or(a, "initial_available", c.adaption.initial_available);
    c.adaption.stopped_walks_on_target = get_or(a, "stopped_walks_on_target", c.adaption.stopped_walks_on_target);
    if (c.adaption.samples < 1 || !(c.adaption.isochrone_s > 0.0)) {
      throw ConfigError("adaption.samples and adaption.isochrone_s must be positive");
    }
  }

  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    c.seeds.clear();
    if (s.is_array()) {
      c.seeds = s.get<std::vector<std::uint64_t>>();
    } else {
      check_keys(s, {"first", "count"}, "seeds");
      const auto first = get_or<std::uint64_t>(s, "first", 1);
      const auto count = require<int>(s, "count", "seeds");
      for (int i = 0; i < count; ++i) c.seeds.push_back(first + static_cast<std::uint64_t>(i));
    }
    if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  }
  c.horizon_s = get_or(doc, "horizon_s", c.horizon_s);
  if (!(c.horizon_s > 0.0)) throw ConfigError("horizon_s must be positive");
  c.record_wall_clock = get_or(doc, "record_wall_clock", c.record_wall_clock);
  return c;
}

ScenarioConfig load_scenario_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  ScenarioConfig c = parse_scenario_config(doc, path.parent_path());
  if (!doc.contains("name")) c.name = path.stem().string();
  return c;
}

json to_json(const ScenarioConfig& c) {
  json doc;
  doc["name"] = c.name;
  if (c.graph_path) {
    doc["graph"] = fs::absolute(*c.graph_path).string();
  } else {
    const GridSpec& g = *c.grid;
    doc["graph"]["grid"] = {{"rows", g.rows},           {"cols", g.cols},
                            {"block_m", g.block_m},     {"speed_kmh", g.speed_kmh},
                            {"resources", g.resources}, {"round_trip_s", g.round_trip_s},
                            {"origin", {{"lat", g.origin.lat}, {"lon", g.origin.lon}}},
                            {"seed", c.grid_seed}};
  }
  doc["speed_factor"] = c.graph_options.speed_factor;
  doc["default_round_trip_s"] = c.graph_options.default_round_trip_s;
  if (c.occupations.trace) {
    doc["occupations"]["trace"] = fs::absolute(*c.occupations.trace).string();
  } else {
    doc["occupations"]["synthetic"] = json::object();
    if (c.occupations.synthetic_horizon_s) doc["occupations"]["synthetic"]["horizon_s"] = *c.occupations.synthetic_horizon_s;
  }
  doc["ctmc"] = {{"lambda_inv_s", 1.0 / c.ctmc.lambda}, {"mu_inv_s", 1.0 / c.ctmc.mu}};
  json& d = doc["destinations"];
  switch (c.destinations.mode) {
    case DestinationConfig::Mode::single: {
      const auto& s = c.destinations.single;
      d = {{"mode", "single"}, {"start_node", s.start_node}, {"lat", s.destination.lat},
           {"lon", s.destination.lon}, {"agents", s.agents}, {"start_time", s.start_time}};
      break;
    }
    case DestinationConfig::Mode::data_driven: {
      const auto& s = c.destinations.data_driven;
      d = {{"mode", "data_driven"}, {"start_node", s.start_node}, {"eps_m", s.eps_m}, {"min_pts", s.min_pts}};
      if (s.hours) d["hours"] = *s.hours;
      if (s.clusters) d["clusters"] = *s.clusters;
      break;
    }
    case DestinationConfig::Mode::explicit_list: {
      d = {{"mode", "explicit"}, {"agents", json::array()}};
      for (const auto& a : c.destinations.agents) {
        d["agents"].push_back({{"start_node", a.start_node}, {"lat", a.destination.lat},
                               {"lon", a.destination.lon}, {"start_time", a.start_time}});
      }
      break;
    }
  }
  doc["planners"] = json::array();
  for (PlannerKind k : c.planners) doc["planners"].push_back(std::string(to_string(k)));
  doc["hs"] = {{"determinizations", c.planner.determinizations}, {"parallel", c.planner.parallel_solve}};
  if (c.planner.hindsight_horizon_s) doc["hs"]["horizon_s"] = *c.planner.hindsight_horizon_s;
  doc["heuristic"] = {{"far_radius_m", c.planner.heuristic.far_radius_m},
                      {"base_threshold_s", c.planner.heuristic.base_threshold_s},
                      {"relax_per_minute_s", c.planner.heuristic.relax_per_minute_s}};
  doc["adaption"] = {{"samples", c.adaption.samples},
                     {"isochrone_s", c.adaption.isochrone_s},
                     {"visit_decay", c.adaption.visit_decay},
                     {"min_distance_factor", c.adaption.min_distance_factor},
                     {"with_reservations", c.adaption_with_reservations},
                     {"initial_available", c.adaption.initial_available},
                     {"stopped_walks_on_target", c.adaption.stopped_walks_on_target}};
  doc["seeds"] = c.seeds;
  doc["horizon_s"] = c.horizon_s;
  doc["record_wall_clock"] = c.record_wall_clock;
  return doc;
}

// ------------------------------------------------------------- generation

namespace {

NodeIndex node_by_id(const RoadGraph& graph, const std::string& id) {
  auto n = graph.find_node(id);
  if (!n) throw ConfigError("unknown start node '" + id + "'");
  return *n;
}

}  // namespace

std::vector<AgentSpec> generate_single_destination(const SingleDestination& config, const RoadGraph& graph,
                                                   PlannerKind planner) {
  if (config.agents < 1) throw ConfigError("single-destination scenario needs at least one agent");
  const NodeIndex start = node_by_id(graph, config.start_node);
  std::vector<AgentSpec> out;
  for (int i = 0; i < config.agents; ++i) {
    out.push_back({AgentId(i), start, config.destination, config.start_time, planner});
  }
  return out;
}

std::vector<OccupationPoint> occupation_points(const RoadGraph& graph, const OccupationTrace& trace) {
  std::vector<OccupationPoint> out;
  for (const OccupationEvent& e : trace.events) {
    if (e.state == ResourceState::occupied) out.push_back({graph.resource(e.resource).position, e.time});
  }
  return out;
}

DataDrivenResult generate_data_driven(const DataDrivenDestinations& config, const RoadGraph& graph,
                                      std::span<const OccupationPoint> events, PlannerKind planner, Rng& rng) {
  if (events.empty()) throw ConfigError("data-driven destinations need occupation events");
  const NodeIndex start = node_by_id(graph, config.start_node);

  std::map<int, std::vector<GeoPoint>> buckets;
  for (const OccupationPoint& p : events) {
    buckets[static_cast<int>(std::floor(p.time / 3600.0))].push_back(p.position);
  }
  std::vector<int> hours;
  if (config.hours) {
    hours = *config.hours;
  } else {
    for (const auto& [h, _] : buckets) hours.push_back(h);
  }

  DataDrivenResult result;
  for (int h : hours) {
    auto it = buckets.find(h);
    if (it == buckets.end()) {
      result.warnings.push_back("hour " + std::to_string(h) + ": no occupation events, no agents");
      continue;
    }
    std::vector<Cluster> clusters = dbscan(it->second, config.eps_m, config.min_pts);
    if (clusters.empty()) {
      if (config.clusters) throw ConfigError("hour " + std::to_string(h) + ": no clusters to select");
      result.warnings.push_back("hour " + std::to_string(h) + ": no clusters, no agents");
      continue;
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const Cluster& a, const Cluster& b) { return a.members.size() > b.members.size(); });
    const std::size_t keep = config.clusters ? std::min<std::size_t>(clusters.size(), *config.clusters)
                                             : clusters.size();
    for (std::size_t k = 0; k < keep; ++k) {
      const Cluster& cl = clusters[k];
      GeoPoint lo = cl.points.front();
      GeoPoint hi = cl.points.front();
      for (const GeoPoint& p : cl.points) {
        lo = {std::min(lo.lat, p.lat), std::min(lo.lon, p.lon)};
        hi = {std::max(hi.lat, p.lat), std::max(hi.lon, p.lon)};
      }
      for (std::size_t m = 0; m < cl.points.size(); ++m) {
        GeoPoint dest = cl.points[m];
        for (int attempt = 0; attempt < 1000; ++attempt) {
          const GeoPoint cand{lo.lat + uniform01(rng) * (hi.lat - lo.lat), lo.lon + uniform01(rng) * (hi.lon - lo.lon)};
          const bool near = std::any_of(cl.points.begin(), cl.points.end(), [&](const GeoPoint& p) {
            return great_circle_distance(p, cand) <= config.eps_m;
          });
          if (near) {
            dest = cand;
            break;
          }
        }
        const double t = 3600.0 * h + 3600.0 * uniform01(rng);
        result.agents.push_back({AgentId(result.agents.size()), start, dest, t, planner});
      }
    }
  }
  return result;
}

// -------------------------------------------------------------- execution

PreparedScenario::PreparedScenario(ScenarioConfig config) : config_(std::move(config)) {
  if (config_.graph_path) {
    graph_ = load_graph_file(*config_.graph_path, config_.graph_options);
  } else if (config_.grid) {
    Rng rng(config_.grid_seed);
    graph_ = make_grid_graph(*config_.grid, rng);
  } else {
    throw ConfigError("scenario has no graph");
  }
  matrix_ = all_pairs_travel_times(graph_);
}

PreparedScenario::SeedInputs PreparedScenario::inputs(std::uint64_t seed) const {
  SeedInputs in;
  const auto params = resource_params(graph_, config_.ctmc);
  const auto& dest = config_.destinations;

  std::vector<AgentSpec> agents;
  double last_start = 0.0;
  if (dest.mode == DestinationConfig::Mode::single) {
    agents = generate_single_destination(dest.single, graph_, PlannerKind::rpl);
    last_start = dest.single.start_time;
  } else if (dest.mode == DestinationConfig::Mode::explicit_list) {
    for (const ExplicitAgent& a : dest.agents) {
      if (a.start_time < 0.0) throw ConfigError("agent start time must be non-negative");
      agents.push_back({AgentId(agents.size()), node_by_id(graph_, a.start_node), a.destination, a.start_time,
                        PlannerKind::rpl});
      last_start = std::max(last_start, a.start_time);
    }
  } else {
    last_start = 86400.0;
  }

  if (config_.occupations.trace) {
    in.trace = read_trace_file(*config_.occupations.trace, graph_);
  } else {
    const double horizon = config_.occupations.synthetic_horizon_s.value_or(last_start + config_.horizon_s + 1.0);
    Rng rng(mix_seed(seed, 101));
    in.trace = synthesize_occupations(params, horizon, rng);
  }

  if (dest.mode == DestinationConfig::Mode::data_driven) {
    Rng rng(mix_seed(seed, 102));
    const auto points = occupation_points(graph_, in.trace);
    DataDrivenResult r = generate_data_driven(dest.data_driven, graph_, points, PlannerKind::rpl, rng);
    agents = std::move(r.agents);
    in.warnings = std::move(r.warnings);
  }
  in.agents = std::move(agents);
  return in;
}

SimulationSettings PreparedScenario::settings() const {
  SimulationSettings s;
  s.trip_timeout_s = config_.horizon_s;
  s.ctmc = config_.ctmc;
  s.planner = config_.planner;
  s.adaption = config_.adaption;
  s.adaption_with_reservations = config_.adaption_with_reservations;
  s.record_wall_clock = config_.record_wall_clock;
  return s;
}

std::vector<MetricsRecord> PreparedScenario::run(const SeedInputs& inputs, PlannerKind planner,
                                                 std::uint64_t seed) const {
  std::vector<AgentSpec> agents = inputs.agents;
  for (AgentSpec& a : agents) a.planner = planner;
  const SimulationSettings s = settings();
  return run_simulation(graph_, matrix_, inputs.trace, agents, s, seed);
}

std::string results_file_name(PlannerKind planner, std::uint64_t seed) {
  return "results_" + std::string(to_string(planner)) + "_seed" + std::to_string(seed) + ".csv";
}

void write_summary_csv(std::ostream& out, std::span<const PlannerSummary> rows) {
  out << kSummaryHeader << '\n';
  std::ostringstream line;
  line << std::fixed << std::setprecision(3);
  for (const PlannerSummary& s : rows) {
    line.str("");
    line << to_string(s.planner) << ',' << s.agents << ',' << s.mean_parking_s << ',' << s.total_parking_s << ',';
    if (s.reduction_pct) line << *s.reduction_pct;
    line << ',' << s.unsuccessful_claims << ',' << s.timed_out << ',' << s.computation_median_ms << ','
         << s.computation_p90_ms << '\n';
    out << line.str();
  }
}

std::vector<PlannerSummary> summarize_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("results_") && name.ends_with(".csv")) files.push_back(entry.path());
  }
  if (files.empty()) throw ConfigError("no results files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<MetricsRecord> all;
  for (const fs::path& f : files) {
    std::ifstream in(f);
    auto records = read_results_csv(in);
    all.insert(all.end(), records.begin(), records.end());
  }
  return summarize(all);
}

BatchReport run_scenario(const ScenarioConfig& config, const fs::path& out_dir, int parallel) {
  if (parallel < 1) throw ConfigError("parallelism must be at least 1");
  fs::create_directories(out_dir);
  {
    std::ofstream cfg(out_dir / "config.json");
    cfg << to_json(config).dump(2) << '\n';
  }
  const PreparedScenario prepared(config);

  BatchReport report;
  std::vector<std::optional<PreparedScenario::SeedInputs>> inputs(config.seeds.size());
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    try {
      inputs[s] = prepared.inputs(config.seeds[s]);
      for (const std::string& w : inputs[s]->warnings) {
        report.warnings.push_back(config.name + " seed " + std::to_string(config.seeds[s]) + ": " + w);
      }
    } catch (const std::exception& e) {
      for (PlannerKind k : config.planners) report.failures.push_back({config.name, k, config.seeds[s], e.what()});
    }
  }

  struct Task {
    std::size_t seed_index;
    PlannerKind planner;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    if (!inputs[s]) continue;
    for (PlannerKind k : config.planners) tasks.push_back({s, k});
  }
  std::vector<std::optional<std::string>> errors(tasks.size());
  const auto count = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel)
  for (std::int64_t i = 0; i < count; ++i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    const std::uint64_t seed = config.seeds[t.seed_index];
    try {
      const auto records = prepared.run(*inputs[t.seed_index], t.planner, seed);
      std::ofstream out(out_dir / results_file_name(t.planner, seed));
      write_results_csv(out, records);
      if (!out) throw Error("cannot write results file");
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::uint64_t seed = config.seeds[tasks[i].seed_index];
    if (errors[i]) {
      report.failures.push_back({config.name, tasks[i].planner, seed, *errors[i]});
    } else {
      report.results_files.push_back(out_dir / results_file_name(tasks[i].planner, seed));
    }
  }
  if (!report.results_files.empty()) {
    const auto rows = summarize_directory(out_dir);
    std::ofstream out(out_dir / "summary.csv");
    write_summary_csv(out, rows);
  }
  return report;
}

BatchReport run_batch(const fs::path& config_dir, const fs::path& out_dir, int parallel) {
  if (!fs::is_directory(config_dir)) throw ConfigError("not a directory: " + config_dir.string());
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") configs.push_back(entry.path());
  }
  if (configs.empty()) throw ConfigError("no *.json configs in " + config_dir.string());
  std::sort(configs.begin(), configs.end());

  BatchReport report;
  for (const fs::path& path : configs) {
    try {
      const ScenarioConfig config = load_scenario_config(path);
      BatchReport r = run_scenario(config, out_dir / path.stem(), parallel);
      report.results_files.insert(report.results_files.end(), r.results_files.begin(), r.results_files.end());
      report.failures.insert(report.failures.end(), r.failures.begin(), r.failures.end());
      report.warnings.insert(report.warnings.end(), r.warnings.begin(), r.warnings.end());
    } catch (const std::exception& e) {
      report.failures.push_back({path.stem().string(), PlannerKind::rpl, 0, e.what()});
    }
  }
  return report;
}

}  // namespace parksearch
