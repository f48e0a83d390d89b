#include "parksearch/simulation.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include "parksearch/errors.hpp"

namespace parksearch {

// ------------------------------------------------------------------ traces

void validate_trace(const OccupationTrace& trace, std::size_t resource_count) {
  if (trace.initial.size() != resource_count) {
    throw TraceError("trace covers " + std::to_string(trace.initial.size()) + " resources, graph has " +
                     std::to_string(resource_count));
  }
  std::vector<double> last(resource_count, -kUnreachable);
  std::vector<ResourceState> state = trace.initial;
  double previous_time = -kUnreachable;
  for (const OccupationEvent& e : trace.events) {
    if (e.resource.get() >= resource_count) throw TraceError("trace references an unknown resource");
    if (e.time < previous_time) throw TraceError("trace events are not ordered by time");
    previous_time = e.time;
    const auto i = e.resource.get();
    if (!(e.time > last[i]) || !(e.time > 0.0)) {
      throw TraceError("non-monotone trace times for resource " + std::to_string(i));
    }
    if (e.state == state[i]) {
      throw TraceError("trace states do not alternate for resource " + std::to_string(i));
    }
    last[i] = e.time;
    state[i] = e.state;
  }
}

std::vector<OccupationEvent> replay_trace(const OccupationTrace& trace, std::size_t resource_count) {
  validate_trace(trace, resource_count);
  return trace.events;
}

namespace {

void sort_events(std::vector<OccupationEvent>& events) {
  std::stable_sort(events.begin(), events.end(), [](const OccupationEvent& a, const OccupationEvent& b) {
    return a.time != b.time ? a.time < b.time : a.resource < b.resource;
  });
}

}  // namespace

OccupationTrace synthesize_occupations(std::span<const CtmcParams> params, double horizon_s, Rng& rng) {
  if (!(horizon_s > 0.0)) throw ConfigError("synthetic occupation horizon must be positive");
  OccupationTrace trace;
  trace.initial.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    ResourceState s = bernoulli(rng, params[i].stationary_availability()) ? ResourceState::available
                                                                          : ResourceState::occupied;
    trace.initial.push_back(s);
    double t = sample_sojourn(params[i], s, rng);
    while (t < horizon_s) {
      s = flipped(s);
      trace.events.push_back({ResourceIndex(i), t, s});
      t += sample_sojourn(params[i], s, rng);
    }
  }
  sort_events(trace.events);
  return trace;
}

double mean_availability(const OccupationTrace& trace, double horizon_s) {
  const std::size_t n = trace.initial.size();
  if (n == 0) return 0.0;
  std::vector<double> since(n, 0.0);
  std::vector<ResourceState> state = trace.initial;
  double available_time = 0.0;
  for (const OccupationEvent& e : trace.events) {
    if (e.time > horizon_s) break;
    const auto i = e.resource.get();
    if (state[i] == ResourceState::available) available_time += e.time - since[i];
    since[i] = e.time;
    state[i] = e.state;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == ResourceState::available) available_time += horizon_s - since[i];
  }
  return available_time / (horizon_s * static_cast<double>(n));
}

OccupationTrace quantize_trace(const OccupationTrace& trace) {
  OccupationTrace out;
  out.initial = trace.initial;
  std::vector<double> last(trace.initial.size(), 0.0);
  std::vector<ResourceState> state = trace.initial;
  for (const OccupationEvent& e : trace.events) {
    const auto i = e.resource.get();
    const double t = std::round(e.time);
    if (!(t > last[i]) || e.state == state[i]) continue;
    out.events.push_back({e.resource, t, e.state});
    last[i] = t;
    state[i] = e.state;
  }
  sort_events(out.events);
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_number(const std::string& text, const char* what, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ParseError(std::string("line ") + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
  }
  return v;
}

}  // namespace

OccupationTrace read_trace_csv(std::istream& in, const RoadGraph& graph) {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != "resource_id,time_s,state") {
    throw ParseError("trace: expected header 'resource_id,time_s,state'");
  }
  const std::size_t n = graph.resource_count();
  std::vector<std::optional<ResourceState>> declared(n);
  std::vector<OccupationEvent> events;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw ParseError("trace line " + std::to_string(line_no) + ": expected 3 fields");
    auto r = graph.find_resource(fields[0]);
    if (!r) throw TraceError("trace references unknown resource '" + fields[0] + "'");
    const double t = parse_number(fields[1], "time", line_no);
    if (t != std::floor(t) || t < 0.0) {
      throw ParseError("trace line " + std::to_string(line_no) + ": time must be a non-negative integer");
    }
    const ResourceState s = resource_state_from_string(fields[2]);
    if (t == 0.0) {
      declared[r->get()] = s;
    } else {
      events.push_back({*r, t, s});
    }
  }
  // per-resource order must be as written; reject before the global sort hides it
  std::vector<double> last(n, 0.0);
  for (const OccupationEvent& e : events) {
    if (!(e.time > last[e.resource.get()])) throw TraceError("non-monotone trace for '" + graph.resource(e.resource).id + "'");
    last[e.resource.get()] = e.time;
  }
  OccupationTrace trace;
  trace.initial.assign(n, ResourceState::available);
  std::vector<bool> seen(n, false);
  for (const OccupationEvent& e : events) {
    const auto i = e.resource.get();
    if (!seen[i]) {
      seen[i] = true;
      if (!declared[i]) trace.initial[i] = flipped(e.state);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (declared[i]) trace.initial[i] = *declared[i];
  }
  sort_events(events);
  trace.events = std::move(events);
  validate_trace(trace, n);
  return trace;
}

OccupationTrace read_trace_file(const std::filesystem::path& path, const RoadGraph& graph) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path.string());
  return read_trace_csv(in, graph);
}

void write_trace_csv(std::ostream& out, const OccupationTrace& trace, const RoadGraph& graph) {
  const OccupationTrace q = quantize_trace(trace);
  out << "resource_id,time_s,state\n";
  for (std::size_t i = 0; i < q.initial.size(); ++i) {
    out << graph.resource(ResourceIndex(i)).id << ",0," << to_string(q.initial[i]) << '\n';
  }
  for (const OccupationEvent& e : q.events) {
    out << graph.resource(e.resource).id << ',' << static_cast<long long>(e.time) << ','
        << to_string(e.state) << '\n';
  }
}

ResourceLedger::ResourceLedger(std::vector<ResourceState> initial)
    : states_(std::move(initial)), fleet_(states_.size(), 0) {}

bool ResourceLedger::apply_trace_flip(const OccupationEvent& event) {
  const auto i = event.resource.get();
  if (fleet_[i]) return false;
  states_[i] = event.state;
  return true;
}

void ResourceLedger::claim_by_fleet(ResourceIndex r) {
  assert(states_[r.get()] == ResourceState::available);
  states_[r.get()] = ResourceState::occupied;
  fleet_[r.get()] = 1;
}

// ------------------------------------------------------------------ engine

const char* to_string(AgentStatus s) {
  switch (s) {
    case AgentStatus::driving: return "driving";
    case AgentStatus::parked: return "parked";
    case AgentStatus::timed_out: return "timed_out";
  }
  return "unknown";
}

AgentStatus agent_status_from_string(std::string_view text) {
  if (text == "driving") return AgentStatus::driving;
  if (text == "parked") return AgentStatus::parked;
  if (text == "timed_out") return AgentStatus::timed_out;
  throw ParseError("unknown agent status '" + std::string(text) + "'");
}

std::vector<CtmcParams> resource_params(const RoadGraph& graph, const CtmcParams& global) {
  std::vector<CtmcParams> out;
  out.reserve(graph.resource_count());
  for (const Resource& r : graph.resources()) out.push_back(r.ctmc.value_or(global));
  return out;
}

std::vector<double> resource_claim_waits(const RoadGraph& graph, std::span<const CtmcParams> params) {
  std::vector<double> out;
  out.reserve(graph.resource_count());
  for (std::size_t i = 0; i < graph.resource_count(); ++i) {
    out.push_back(expected_wait_time(params[i], graph.resource(ResourceIndex(i)).round_trip_s));
  }
  return out;
}

namespace {

enum class AgentEventKind : std::uint8_t { at_node, claim };

struct AgentEvent {
  double time = 0.0;
  AgentId agent;
  std::uint64_t seq = 0;
  AgentEventKind kind = AgentEventKind::at_node;
  NodeIndex node;                 // at_node
  std::optional<EdgeIndex> via;   // at_node
  ResourceIndex resource;         // claim
};

struct LaterFirst {
  bool operator()(const AgentEvent& a, const AgentEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.agent != b.agent) return a.agent > b.agent;
    return a.seq > b.seq;
  }
};

struct AgentRuntime {
  AgentSpec spec;
  AgentState state;
  std::vector<double> terminal;
  AgentOutcome outcome;
  std::uint64_t decisions = 0;
  std::optional<AdaptionRecord> adaption;
  std::optional<ResourceIndex> adaption_target;
};

EdgeIndex destination_street(const RoadGraph& graph, const GeoPoint& destination,
                             std::optional<EdgeIndex>& out) {
  double best = kUnreachable;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const Edge& e = graph.edge(EdgeIndex(i));
    const GeoPoint& a = graph.node(e.from).position;
    const GeoPoint& b = graph.node(e.to).position;
    const GeoPoint mid{(a.lat + b.lat) / 2.0, (a.lon + b.lon) / 2.0};
    const double d = great_circle_distance(mid, destination);
    if (d < best) {
      best = d;
      out = EdgeIndex(i);
    }
  }
  return out.value_or(EdgeIndex{});
}

class Engine {
 public:
  Engine(const RoadGraph& graph, const TravelTimeMatrix& matrix, const OccupationTrace& trace,
         std::span<const AgentSpec> agents, const SimulationSettings& settings, std::uint64_t seed)
      : graph_(graph),
        matrix_(matrix),
        settings_(settings),
        seed_(seed),
        flips_(replay_trace(trace, graph.resource_count())),
        ledger_(trace.initial),
        params_(resource_params(graph, settings.ctmc)),
        claim_wait_(resource_claim_waits(graph, params_)) {
    runtimes_.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const AgentSpec& spec = agents[i];
      if (spec.id.get() != i) throw ConfigError("agent ids must be 0..n-1 in order");
      if (spec.start_node.get() >= graph.node_count()) throw ConfigError("agent start node does not exist");
      if (spec.start_time < 0.0) throw ConfigError("agent start time must be non-negative");
      AgentRuntime rt;
      rt.spec = spec;
      rt.state.id = spec.id;
      rt.state.node = spec.start_node;
      rt.state.destination = spec.destination;
      rt.state.destination_node = graph.nearest_node(spec.destination);
      destination_street(graph, spec.destination, rt.state.destination_edge);
      rt.terminal = terminal_costs(graph, spec.destination);
      rt.outcome.id = spec.id;
      rt.outcome.planner = spec.planner;
      runtimes_.push_back(std::move(rt));
      push({spec.start_time, spec.id, 0, AgentEventKind::at_node, spec.start_node, std::nullopt, {}});
    }
    remaining_ = runtimes_.size();
  }

  SimulationResult run() {
    std::size_t cursor = 0;
    while (remaining_ > 0 && !queue_.empty()) {
      const AgentEvent& next = queue_.top();
      // flips go first at equal timestamps
      if (cursor < flips_.size() && flips_[cursor].time <= next.time) {
        ledger_.apply_trace_flip(flips_[cursor]);
        ++cursor;
        continue;
      }
      AgentEvent event = next;
      queue_.pop();
      if (settings_.record_log && cursor < flips_.size() && flips_[cursor].time <= event.time) {
        ++result_.log.stale_views;
      }
      if (event.kind == AgentEventKind::at_node) {
        on_node(event);
      } else {
        on_claim(event);
      }
      if (settings_.record_log) log_status(event.time);
    }
    for (AgentRuntime& rt : runtimes_) {
      if (rt.outcome.status == AgentStatus::driving) time_out(rt);
      result_.outcomes.push_back(rt.outcome);
    }
    return std::move(result_);
  }

 private:
  void push(AgentEvent e) {
    e.seq = seq_++;
    queue_.push(e);
  }

  void log_status(double time) {
    StatusCount c{time, runtimes_.size(), 0, 0, 0};
    for (const AgentRuntime& rt : runtimes_) {
      switch (rt.outcome.status) {
        case AgentStatus::driving: ++c.driving; break;
        case AgentStatus::parked: ++c.parked; break;
        case AgentStatus::timed_out: ++c.timed_out; break;
      }
    }
    result_.log.status.push_back(c);
  }

  PlanningView view_for(const AgentRuntime& rt, double now) const {
    PlanningView view;
    view.graph = &graph_;
    view.matrix = &matrix_;
    view.states = ledger_.states();
    view.params = params_;
    view.claim_wait = claim_wait_;
    view.terminal_costs = rt.terminal;
    view.agent = rt.spec.id;
    view.now = now;
    const PlannerKind kind = rt.spec.planner;
    if (uses_reservations(kind) || (uses_adaptions(kind) && settings_.adaption_with_reservations)) {
      view.reservations = &reservations_;
    }
    if (uses_adaptions(kind)) view.overlay = &overlay_;
    return view;
  }

  void release_fleet_state(AgentRuntime& rt) {
    reservations_.cancel(rt.spec.id);
    if (rt.adaption) {
      reverse_adaptions(*rt.adaption, overlay_);
      rt.adaption.reset();
      rt.adaption_target.reset();
    }
  }

  void finish(AgentRuntime& rt, AgentStatus status) {
    rt.outcome.status = status;
    release_fleet_state(rt);
    --remaining_;
  }

  void time_out(AgentRuntime& rt) {
    rt.outcome.total_trip_s = settings_.trip_timeout_s;
    if (rt.outcome.status == AgentStatus::driving) finish(rt, AgentStatus::timed_out);
  }

  void on_node(const AgentEvent& event) {
    AgentRuntime& rt = runtimes_[event.agent.get()];
    const double now = event.time;
    rt.state.node = event.node;
    if (event.via) rt.state.last_edge = event.via;
    if (settings_.record_log) result_.log.visits.push_back({event.agent, event.node, now, event.via});

    if (now - rt.spec.start_time >= settings_.trip_timeout_s) {
      time_out(rt);
      return;
    }

    const PlanningView view = view_for(rt, now);
    const std::uint64_t agent_seed = mix_seed(seed_, event.agent.get());
    Rng rng(mix_seed(agent_seed, 2 * rt.decisions));
    const auto started = std::chrono::steady_clock::now();
    RouteDecision decision;
    try {
      decision = decide(rt.spec.planner, view, rt.state, settings_.planner, rng);
    } catch (const NoPathError&) {
      time_out(rt);
      return;
    }
    update_fleet_state(rt, view, decision, mix_seed(agent_seed, 2 * rt.decisions + 1));
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (settings_.record_wall_clock) {
      rt.outcome.computation_s += std::chrono::duration<double>(elapsed).count();
    }
    ++rt.decisions;

    if (settings_.record_log && !action_valid_at(graph_, event.node, decision.chosen)) {
      ++result_.log.invalid_actions;
    }

    if (const auto* road = std::get_if<TakeRoad>(&decision.chosen)) {
      const Edge& e = graph_.edge(road->edge);
      push({now + e.drive_time_s, event.agent, 0, AgentEventKind::at_node, e.to, road->edge, {}});
    } else {
      const ResourceIndex r = std::get<TakeResource>(decision.chosen).resource;
      push({now + graph_.resource(r).offset_s, event.agent, 0, AgentEventKind::claim, {}, std::nullopt, r});
    }
  }

  void update_fleet_state(AgentRuntime& rt, const PlanningView& view, const RouteDecision& decision,
                          std::uint64_t adaption_seed) {
    const PlannerKind kind = rt.spec.planner;
    if (kind == PlannerKind::rpl_r) {
      if (decision.target && decision.target_treated_available && decision.expected_arrival) {
        place_reservation(reservations_, rt.spec.id, *decision.target, *decision.expected_arrival);
      } else {
        reservations_.cancel(rt.spec.id);
      }
    }
    if (kind == PlannerKind::hs_r || (kind == PlannerKind::hs_a && settings_.adaption_with_reservations)) {
      if (auto res = hindsight_reservation(view, decision.solutions, rt.spec.id, decision.chosen)) {
        reservations_.place(*res);
      } else {
        reservations_.cancel(rt.spec.id);
      }
    }
    if (kind == PlannerKind::hs_a) {
      if (decision.target == rt.adaption_target && rt.adaption) return;
      if (rt.adaption) {
        reverse_adaptions(*rt.adaption, overlay_);
        rt.adaption.reset();
      }
      rt.adaption_target = decision.target;
      if (!decision.target || !decision.expected_arrival) return;
      Rng rng(adaption_seed);
      try {
        AdaptionRecord record =
            adapt_probabilities(view, *decision.target, *decision.expected_arrival, settings_.adaption, rng);
        apply_adaptions(record, overlay_);
        rt.adaption = std::move(record);
      } catch (const DegenerateTargetError&) {
        // nothing to adapt around a dead-end target
      }
    }
  }

  void on_claim(const AgentEvent& event) {
    AgentRuntime& rt = runtimes_[event.agent.get()];
    const double now = event.time;
    const ResourceIndex r = event.resource;
    const bool success = ledger_.state(r) == ResourceState::available;
    if (settings_.record_log) result_.log.claims.push_back({event.agent, r, now, success});
    if (success) {
      ledger_.claim_by_fleet(r);
      rt.outcome.parked_resource = r;
      rt.outcome.total_trip_s = now - rt.spec.start_time + rt.terminal[r.get()];
      finish(rt, AgentStatus::parked);
      return;
    }
    ++rt.outcome.unsuccessful_claims;
    const Resource& res = graph_.resource(r);
    const Edge& e = graph_.edge(res.edge);
    push({now + (e.drive_time_s - res.offset_s), event.agent, 0, AgentEventKind::at_node, e.to, res.edge, {}});
  }

  const RoadGraph& graph_;
  const TravelTimeMatrix& matrix_;
  const SimulationSettings& settings_;
  std::uint64_t seed_;
  std::vector<OccupationEvent> flips_;
  ResourceLedger ledger_;
  std::vector<CtmcParams> params_;
  std::vector<double> claim_wait_;
  ReservationTable reservations_;
  AdaptionOverlay overlay_;
  std::vector<AgentRuntime> runtimes_;
  std::priority_queue<AgentEvent, std::vector<AgentEvent>, LaterFirst> queue_;
  std::uint64_t seq_ = 0;
  std::size_t remaining_ = 0;
  SimulationResult result_;
};

}  // namespace

SimulationResult simulate(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                          const OccupationTrace& trace, std::span<const AgentSpec> agents,
                          const SimulationSettings& settings, std::uint64_t seed) {
  if (matrix.size() != graph.node_count()) throw ConfigError("travel time matrix does not match graph");
  Engine engine(graph, matrix, trace, agents, settings, seed);
  return engine.run();
}

double taxi_time(const RoadGraph& graph, const TravelTimeMatrix& matrix, const AgentSpec& spec) {
  double best = kUnreachable;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const double drive = matrix(spec.start_node, NodeIndex(v));
    if (drive == kUnreachable) continue;
    best = std::min(best, drive + walking_time(graph.node(NodeIndex(v)).position, spec.destination));
  }
  return best;
}

std::vector<MetricsRecord> compute_metrics(const RoadGraph& graph,
                                           std::span<const AgentOutcome> outcomes,
                                           std::span<const double> taxi_times) {
  std::vector<MetricsRecord> out;
  out.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const AgentOutcome& o = outcomes[i];
    MetricsRecord m;
    m.agent = o.id.value;
    m.planner = o.planner;
    m.status = o.status;
    m.total_trip_s = o.status == AgentStatus::timed_out ? kTripTimeoutS : o.total_trip_s;
    m.taxi_s = taxi_times[i];
    m.parking_s = m.total_trip_s - m.taxi_s;
    m.unsuccessful_claims = o.unsuccessful_claims;
    m.computation_ms = o.computation_s * 1000.0;
    if (o.parked_resource) m.parked_resource = graph.resource(*o.parked_resource).id;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MetricsRecord> run_simulation(const RoadGraph& graph, const TravelTimeMatrix& matrix,
                                          const OccupationTrace& trace,
                                          std::span<const AgentSpec> agents,
                                          const SimulationSettings& settings, std::uint64_t seed) {
  const SimulationResult result = simulate(graph, matrix, trace, agents, settings, seed);
  std::vector<double> taxi;
  taxi.reserve(agents.size());
  for (const AgentSpec& spec : agents) taxi.push_back(taxi_time(graph, matrix, spec));
  return compute_metrics(graph, result.outcomes, taxi);
}

// ----------------------------------------------------------------- results

void write_results_csv(std::ostream& out, std::span<const MetricsRecord> records) {
  out << kResultsHeader << '\n';
  std::ostringstream line;
  line << std::fixed << std::setprecision(3);
  for (const MetricsRecord& m : records) {
    line.str("");
    line << m.agent << ',' << to_string(m.planner) << ',' << m.total_trip_s << ',' << m.taxi_s << ','
         << m.parking_s << ',' << m.unsuccessful_claims << ',' << m.computation_ms << ','
         << m.parked_resource << ',' << to_string(m.status) << '\n';
    out << line.str();
  }
}

std::vector<MetricsRecord> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != kResultsHeader) {
    throw ParseError("results: unexpected header");
  }
  std::vector<MetricsRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw ParseError("results line " + std::to_string(line_no) + ": expected 9 fields");
    MetricsRecord m;
    m.agent = static_cast<std::uint32_t>(parse_number(f[0], "agent id", line_no));
    m.planner = planner_kind_from_string(f[1]);
    m.total_trip_s = parse_number(f[2], "total trip", line_no);
    m.taxi_s = parse_number(f[3], "taxi time", line_no);
    m.parking_s = parse_number(f[4], "parking time", line_no);
    m.unsuccessful_claims = static_cast<int>(parse_number(f[5], "claims", line_no));
    m.computation_ms = parse_number(f[6], "computation", line_no);
    m.parked_resource = f[7];
    m.status = agent_status_from_string(f[8]);
    out.push_back(std::move(m));
  }
  return out;
}

double reduction_percent(double base_total, double variant_total) {
  return (base_total - variant_total) / base_total * 100.0;
}

std::optional<PlannerKind> single_agent_base(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::rpl_r: return PlannerKind::rpl;
    case PlannerKind::hs_r:
    case PlannerKind::hs_a: return PlannerKind::hs;
    default: return std::nullopt;
  }
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

std::vector<PlannerSummary> summarize(std::span<const MetricsRecord> records) {
  std::vector<PlannerSummary> out;
  for (PlannerKind kind : {PlannerKind::random, PlannerKind::heuristic, PlannerKind::rpl, PlannerKind::hs,
                           PlannerKind::rpl_r, PlannerKind::hs_r, PlannerKind::hs_a}) {
    PlannerSummary s;
    s.planner = kind;
    std::vector<double> computation;
    for (const MetricsRecord& m : records) {
      if (m.planner != kind) continue;
      ++s.agents;
      s.total_parking_s += m.parking_s;
      s.unsuccessful_claims += m.unsuccessful_claims;
      if (m.status == AgentStatus::timed_out) ++s.timed_out;
      computation.push_back(m.computation_ms);
    }
    if (s.agents == 0) continue;
    s.mean_parking_s = s.total_parking_s / static_cast<double>(s.agents);
    s.computation_median_ms = quantile(computation, 0.5);
    s.computation_p90_ms = quantile(computation, 0.9);
    out.push_back(s);
  }
  for (PlannerSummary& s : out) {
    auto base = single_agent_base(s.planner);
    if (!base) continue;
    for (const PlannerSummary& b : out) {
      if (b.planner == *base && b.total_parking_s != 0.0) {
        s.reduction_pct = reduction_percent(b.total_parking_s, s.total_parking_s);
      }
    }
  }
  return out;
}

}  // namespace parksearch
