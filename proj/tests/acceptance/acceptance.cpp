// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: acceptance [seeds]  (default 20 seeds for the grid study)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "parksearch/fleet.hpp"
#include "parksearch/reservations.hpp"
#include "parksearch/scenario.hpp"

namespace fs = std::filesystem;
using namespace parksearch;
using parksearch::testing::uniform_int;
using parksearch::testing::uniform_real;

namespace {

constexpr auto A = ResourceState::available;
constexpr auto O = ResourceState::occupied;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int n, const char* title, const Outcome& o, double seconds) {
  std::printf("criterion %2d %s  %-34s %s (%.1f s)\n", n, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

template <typename F>
void check(int n, const char* title, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(n, title, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ------------------------------------------------------------------ 1, 2

double chain_monte_carlo(const CtmcParams& p, ResourceState from, double dt, int samples, Rng& rng) {
  int available = 0;
  for (int i = 0; i < samples; ++i) {
    ResourceState s = from;
    for (double t = exponential(rng, s == A ? p.lambda : p.mu); t <= dt;
         t += exponential(rng, s == A ? p.lambda : p.mu)) {
      s = flipped(s);
    }
    available += s == A;
  }
  return static_cast<double>(available) / samples;
}

Outcome ctmc_correctness() {
  Rng rng(1001);
  double worst_mc = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto p = CtmcParams::from_mean_sojourns(uniform_real(rng, 30, 3000), uniform_real(rng, 30, 3000));
    const double t = uniform_real(rng, 0, 3000);
    for (ResourceState from : {A, O}) {
      const double mc = chain_monte_carlo(p, from, t, 100000, rng);
      worst_mc = std::max(worst_mc, std::abs(mc - transition_probability(p, from, A, t)));
    }
  }
  double worst_ck = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = CtmcParams::from_mean_sojourns(uniform_real(rng, 1, 5000), uniform_real(rng, 1, 5000));
    const double s = uniform_real(rng, 0, 5000);
    const double t = uniform_real(rng, 0, 5000);
    for (ResourceState from : {A, O}) {
      for (ResourceState to : {A, O}) {
        double composed = 0.0;
        for (ResourceState mid : {A, O}) {
          composed += transition_probability(p, from, mid, s) * transition_probability(p, mid, to, t);
        }
        worst_ck = std::max(worst_ck, std::abs(composed - transition_probability(p, from, to, s + t)));
      }
    }
  }
  return {worst_mc <= 0.01 && worst_ck <= 1e-9,
          fmt("max |MC - closed form| %.4f, max Chapman-Kolmogorov error %.1e", worst_mc, worst_ck)};
}

Outcome stationary_availability() {
  const std::vector<CtmcParams> params(4608, CtmcParams::from_mean_sojourns(120.0, 2091.0));
  Rng rng(1002);
  const double horizon = 1e6;
  const double mean = mean_availability(synthesize_occupations(params, horizon, rng), horizon);
  return {std::abs(mean - 0.054) <= 0.005, fmt("long-run availability %.2f%% (target 5.4 +- 0.5)", mean * 100)};
}

// --------------------------------------------------------------------- 3

Outcome oracle_equivalences() {
  Rng rng(1003);
  int apsp_graphs = 0;
  for (int i = 0; i < 60; ++i, ++apsp_graphs) {
    const int n = uniform_int(rng, 2, 50);
    const RoadGraph g = testing::random_graph(rng, n, uniform_int(rng, 0, 4 * n), 0);
    const TravelTimeMatrix m = all_pairs_travel_times(g);
    const auto oracle = testing::bellman_ford_all(g);
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (m(NodeIndex(u), NodeIndex(v)) != oracle[u][v]) return {false, fmt("APSP differs on graph %d", i)};
      }
    }
    if (!(m == all_pairs_travel_times_serial(g))) return {false, "parallel APSP differs from serial"};
  }

  // every availability pattern of up to five resources is one future
  int futures = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = uniform_int(rng, 2, 8);
    testing::ViewFixture fx(testing::random_graph(rng, n, 3 * n, uniform_int(rng, 1, 5)),
                            GeoPoint{uniform_real(rng, 0, 0.01), uniform_real(rng, 0, 0.01)});
    const NodeIndex from(uniform_int(rng, 0, n - 1));
    DeterminizationSet set = sample_determinizations(fx.view(), from, 1, rng);
    const std::size_t k = set.scope.size();
    set.futures.assign(std::size_t{1} << k, {});
    for (std::size_t mask = 0; mask < set.futures.size(); ++mask) {
      for (std::size_t j = 0; j < k; ++j) set.futures[mask].available.push_back((mask >> j) & 1);
    }
    const auto sols = solve_determinizations(fx.view(), set);
    for (std::size_t mask = 0; mask < set.futures.size(); ++mask, ++futures) {
      std::vector<std::uint8_t> available(fx.graph.resource_count(), 0);
      for (std::size_t j = 0; j < k; ++j) available[set.scope[j].get()] = set.futures[mask].available[j];
      const auto cost = testing::brute_force_costs(fx, from, available);
      const std::size_t best = testing::argmin_first(cost);
      const bool none = cost[best] == kUnreachable;
      if (none != !sols[mask].resource || (!none && (sols[mask].resource->get() != best ||
                                                     sols[mask].cost != cost[best]))) {
        return {false, fmt("determinization solve differs on case %d", i)};
      }
    }
  }

  int clusterings = 0;
  for (int i = 0; i < 30; ++i, ++clusterings) {
    const GeoPoint origin{uniform_real(rng, -60, 60), uniform_real(rng, -170, 170)};
    std::vector<GeoPoint> centres;
    for (int c = uniform_int(rng, 1, 6); c > 0; --c) {
      centres.push_back(testing::offset_m(origin, uniform_real(rng, 0, 2000), uniform_real(rng, 0, 2000)));
    }
    std::vector<GeoPoint> pts;
    for (int j = uniform_int(rng, 1, 500); j > 0; --j) {
      const double spread = rng() % 4 == 0 ? 1000.0 : 75.0;
      pts.push_back(testing::offset_m(centres[rng() % centres.size()], uniform_real(rng, -spread, spread),
                                      uniform_real(rng, -spread, spread)));
    }
    const double eps = uniform_real(rng, 20, 150);
    const int min_pts = uniform_int(rng, 1, 12);
    const auto got = dbscan(pts, eps, min_pts);
    const auto want = testing::reference_dbscan(pts, eps, min_pts);
    bool same = got.size() == want.size();
    for (std::size_t c = 0; same && c < got.size(); ++c) same = got[c].members == want[c];
    if (!same) return {false, fmt("dbscan differs on case %d", i)};
  }
  return {true, fmt("%d APSP graphs, %d determinizations, %d clusterings exact", apsp_graphs, futures, clusterings)};
}

// --------------------------------------------------------------------- 4

// Three nodes joined both ways, one resource on each clockwise edge. Each
// resource is available with the probability the determinizations use, drawn
// once and revealed on arrival; an occupied resource can still be taken after
// the expected wait. Value iteration over (node, knowledge) gives the optimal
// expected cost of any policy that cannot see the future.
Outcome hindsight_lower_bound() {
  testing::GraphBuilder b;
  const NodeIndex n0 = b.node(0.0, 0.0);
  const NodeIndex n1 = b.node(0.002, 0.0);
  const NodeIndex n2 = b.node(0.001, 0.0017);
  struct Link {
    NodeIndex from, to;
    double drive;
    EdgeIndex edge;
    int resource = -1;
    double offset = 0.0;
  };
  std::vector<Link> links{{n0, n1, 40.0, {}}, {n1, n2, 50.0, {}}, {n2, n0, 45.0, {}},
                          {n1, n0, 40.0, {}}, {n2, n1, 50.0, {}}, {n0, n2, 45.0, {}}};
  for (Link& l : links) l.edge = b.edge(l.from, l.to, l.drive);
  const double offsets[3] = {10.0, 25.0, 30.0};
  for (int r = 0; r < 3; ++r) {
    links[r].resource = r;
    links[r].offset = offsets[r];
    b.resource(links[r].edge, offsets[r]);
  }
  testing::ViewFixture fx(b.build(), GeoPoint{0.0012, 0.0009}, CtmcParams::from_mean_sojourns(120.0, 240.0));
  const PlanningView view = fx.view();

  const DeterminizationSet set = sample_determinizations_seeded(view, n0, 20000, 1004, 0.0);
  double p[3];
  for (std::size_t j = 0; j < 3; ++j) {
    p[set.scope[j].get()] = view.predicted_availability(set.scope[j], set.drive[j]);
  }

  // knowledge digit per resource: 0 unknown, 1 seen available, 2 seen occupied
  constexpr int kStates = 27;
  auto digit = [](int k, int r) { return (k / (r == 0 ? 1 : r == 1 ? 3 : 9)) % 3; };
  auto with = [&](int k, int r, int d) { return k + (d - digit(k, r)) * (r == 0 ? 1 : r == 1 ? 3 : 9); };
  std::vector<double> value(3 * kStates, 0.0);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (int u = 0; u < 3; ++u) {
      for (int k = 0; k < kStates; ++k) {
        double best = kUnreachable;
        for (const Link& l : links) {
          if (l.from.get() != static_cast<std::size_t>(u)) continue;
          const std::size_t v = l.to.get();
          double q;
          if (l.resource < 0) {
            q = l.drive + value[v * kStates + k];
          } else {
            const int r = l.resource;
            auto seen = [&](int d) {
              const double park = l.offset + fx.terminal[r] + (d == 2 ? fx.claim_wait[r] : 0.0);
              return std::min(park, l.drive + value[v * kStates + with(k, r, d)]);
            };
            q = digit(k, r) == 0 ? p[r] * seen(1) + (1 - p[r]) * seen(2) : seen(digit(k, r));
          }
          best = std::min(best, q);
        }
        change = std::max(change, std::abs(best - value[u * kStates + k]));
        value[u * kStates + k] = best;
      }
    }
    if (change < 1e-10) break;
  }
  const double optimal = value[n0.get() * kStates + 0];

  const auto sols = solve_determinizations(view, set);
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& s : sols) {
    sum += s.cost;
    sq += s.cost * s.cost;
  }
  const double n = static_cast<double>(sols.size());
  const double mean = sum / n;
  const double se = std::sqrt(std::max(0.0, sq / n - mean * mean) / (n - 1));
  return {mean <= optimal + 2 * se,
          fmt("mean determinization cost %.2f s (SE %.2f) vs optimal %.2f s", mean, se, optimal)};
}

// -------------------------------------------------------------- 5 to 8

ScenarioConfig grid_study(int seeds) {
  ScenarioConfig c;
  c.name = "grid_study";
  c.grid = GridSpec{};
  c.grid_seed = 7;
  c.destinations.mode = DestinationConfig::Mode::single;
  c.destinations.single.start_node = "n0_0";
  // centre of the 10 x 10 grid
  Rng rng(c.grid_seed);
  const RoadGraph g = make_grid_graph(*c.grid, rng);
  const GeoPoint a = g.node(*g.find_node("n4_4")).position;
  const GeoPoint z = g.node(*g.find_node("n5_5")).position;
  c.destinations.single.destination = {(a.lat + z.lat) / 2, (a.lon + z.lon) / 2};
  c.destinations.single.agents = 20;
  c.planners = {PlannerKind::random, PlannerKind::heuristic, PlannerKind::rpl, PlannerKind::rpl_r,
                PlannerKind::hs,     PlannerKind::hs_r,      PlannerKind::hs_a};
  c.seeds.clear();
  for (int s = 1; s <= seeds; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
  return c;
}

struct SeedStats {
  double total_parking = 0.0;
  double mean_parking = 0.0;
  long claims = 0;
};

struct Study {
  std::map<PlannerKind, std::vector<SeedStats>> per_seed;
  std::map<PlannerKind, std::vector<double>> computation_ms;
};

Study run_study(int seeds) {
  const PreparedScenario prepared(grid_study(seeds));
  Study s;
  for (std::uint64_t seed : prepared.config().seeds) {
    const auto inputs = prepared.inputs(seed);
    for (PlannerKind k : prepared.config().planners) {
      SeedStats st;
      const auto records = prepared.run(inputs, k, seed);
      for (const MetricsRecord& m : records) {
        st.total_parking += m.parking_s;
        st.claims += m.unsuccessful_claims;
        s.computation_ms[k].push_back(m.computation_ms);
      }
      st.mean_parking = st.total_parking / static_cast<double>(records.size());
      s.per_seed[k].push_back(st);
    }
  }
  return s;
}

double total(const Study& s, PlannerKind k) {
  double t = 0.0;
  for (const SeedStats& st : s.per_seed.at(k)) t += st.total_parking;
  return t;
}

Outcome competition_benefit(const Study& s) {
  const double rpl_ratio = total(s, PlannerKind::rpl_r) / total(s, PlannerKind::rpl);
  const double hsr_ratio = total(s, PlannerKind::hs_r) / total(s, PlannerKind::hs);
  const double hsa_ratio = total(s, PlannerKind::hs_a) / total(s, PlannerKind::hs);
  return {rpl_ratio <= 0.6 && hsr_ratio <= 0.8 && hsa_ratio <= 0.8,
          fmt("rpl_r/rpl %.3f (<= 0.6), hs_r/hs %.3f, hs_a/hs %.3f (<= 0.8)", rpl_ratio, hsr_ratio, hsa_ratio)};
}

Outcome fewer_claims(const Study& s) {
  const std::pair<PlannerKind, PlannerKind> pairs[] = {
      {PlannerKind::rpl_r, PlannerKind::rpl}, {PlannerKind::hs_r, PlannerKind::hs}, {PlannerKind::hs_a, PlannerKind::hs}};
  std::string detail;
  bool pass = true;
  for (const auto& [variant, base] : pairs) {
    const auto& v = s.per_seed.at(variant);
    const auto& b = s.per_seed.at(base);
    int fewer = 0;
    for (std::size_t i = 0; i < v.size(); ++i) fewer += v[i].claims < b[i].claims;
    const double share = static_cast<double>(fewer) / static_cast<double>(v.size());
    pass = pass && share >= 0.9;
    detail += fmt("%s %d/%zu ", std::string(to_string(variant)).c_str(), fewer, v.size());
  }
  return {pass, detail + "seeds with fewer claims (>= 90%)"};
}

Outcome baseline_ordering(const Study& s) {
  const PlannerKind informed[] = {PlannerKind::rpl, PlannerKind::rpl_r, PlannerKind::hs, PlannerKind::hs_r,
                                  PlannerKind::hs_a};
  const std::size_t seeds = s.per_seed.at(PlannerKind::rpl).size();
  int random_ok = 0;
  int heuristic_ok = 0;
  for (std::size_t i = 0; i < seeds; ++i) {
    double worst_informed = 0.0;
    for (PlannerKind k : informed) worst_informed = std::max(worst_informed, s.per_seed.at(k)[i].mean_parking);
    random_ok += s.per_seed.at(PlannerKind::random)[i].mean_parking >= worst_informed;
    heuristic_ok += s.per_seed.at(PlannerKind::heuristic)[i].mean_parking >= worst_informed;
  }
  auto mean_of = [&](PlannerKind k) { return total(s, k) / (20.0 * static_cast<double>(seeds)); };
  const bool pass = random_ok == static_cast<int>(seeds) && heuristic_ok == static_cast<int>(seeds);
  return {pass, fmt("seeds ok: random %d/%zu, heuristic %d/%zu; mean parking random %.0f, heuristic %.0f, "
                    "rpl %.0f, hs %.0f s",
                    random_ok, seeds, heuristic_ok, seeds, mean_of(PlannerKind::random),
                    mean_of(PlannerKind::heuristic), mean_of(PlannerKind::rpl), mean_of(PlannerKind::hs))};
}

Outcome computation_ordering(const Study& s) {
  auto median = [&](PlannerKind k) { return quantile(s.computation_ms.at(k), 0.5); };
  const double slowest_replan = std::max(median(PlannerKind::rpl), median(PlannerKind::rpl_r));
  const double fastest_hindsight =
      std::min({median(PlannerKind::hs), median(PlannerKind::hs_r), median(PlannerKind::hs_a)});
  return {slowest_replan < fastest_hindsight,
          fmt("median ms: replanning <= %.3f, hindsight >= %.3f", slowest_replan, fastest_hindsight)};
}

// --------------------------------------------------------------------- 9

std::map<std::string, std::string> read_results(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || !name.starts_with("results_")) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files[fs::relative(entry.path(), dir).string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "parksearch_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root / "configs");
  ScenarioConfig c = grid_study(2);
  c.record_wall_clock = false;
  std::ofstream(root / "configs" / "grid.json") << to_json(c).dump(2);
  c.destinations.single.agents = 8;
  c.seeds = {11, 12, 13};
  std::ofstream(root / "configs" / "grid_small.json") << to_json(c).dump(2);

  const BatchReport first = run_batch(root / "configs", root / "first");
  const BatchReport second = run_batch(root / "configs", root / "second", 2);
  if (!first.failures.empty() || !second.failures.empty()) return {false, "batch run failed"};
  const auto a = read_results(root / "first");
  const auto b = read_results(root / "second");
  fs::remove_all(root);
  return {!a.empty() && a == b, fmt("%zu results files, byte-identical: %s", a.size(), a == b ? "yes" : "no")};
}

// -------------------------------------------------------------------- 10

Outcome reversal_and_uniqueness() {
  Rng rng(1010);
  long violations = 0;

  // Adaptions: the overlay always holds exactly the live records' entries in
  // application order; undoing the newest record restores the prior overlay.
  AdaptionOverlay overlay;
  std::vector<AdaptionRecord> live;
  std::vector<std::optional<AdaptionOverlay>> before;  // parallel to live
  std::map<ResourceIndex, std::vector<AdaptionOverlay::Entry>> model;
  auto undo = [&](std::size_t i) {
    reverse_adaptions(live[i], overlay);
    for (auto& [r, entries] : model) {
      std::erase_if(entries, [&](const auto& e) { return e.record == live[i].id; });
    }
    try {
      reverse_adaptions(live[i], overlay);
      ++violations;
    } catch (const UnknownRecordError&) {
    }
    if (before[i] && i + 1 == live.size()) violations += !(overlay == *before[i]);
    for (std::size_t j = i + 1; j < before.size(); ++j) before[j].reset();
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
    before.erase(before.begin() + static_cast<std::ptrdiff_t>(i));
  };
  for (int op = 0; op < 10000; ++op) {
    const auto kind = rng() % 4;
    if (kind == 0 && !live.empty()) {
      undo(live.size() - 1);
    } else if (kind == 1 && !live.empty()) {
      undo(rng() % live.size());
    } else {
      before.emplace_back(overlay);
      AdaptionRecord rec{AgentId(static_cast<std::uint32_t>(rng() % 20)), 0, {}};
      for (int e = uniform_int(rng, 0, 5); e > 0; --e) {
        rec.entries.push_back({ResourceIndex(rng() % 8), uniform_real(rng, 0, 1000), uniform_real(rng, 0, 0.3)});
      }
      apply_adaptions(rec, overlay);
      for (const auto& e : rec.entries) model[e.resource].push_back({e.activation_time, e.delta, rec.owner, rec.id});
      live.push_back(rec);
    }
    for (int r = 0; r < 8; ++r) {
      const auto* entries = overlay.entries(ResourceIndex(r));
      const auto& want = model[ResourceIndex(r)];
      violations += !(entries == nullptr ? want.empty() : *entries == want);
    }
  }
  while (!live.empty()) undo(rng() % live.size());
  violations += !overlay.empty();

  // Reservations: at most one per agent, and precedence matches a plain list.
  ReservationTable table;
  std::map<std::uint32_t, Reservation> by_agent;
  for (int op = 0; op < 10000; ++op) {
    const AgentId a(static_cast<std::uint32_t>(rng() % 40));
    if (rng() % 3 == 0) {
      violations += table.cancel(a) != (by_agent.erase(a.value) == 1);
    } else {
      const Reservation r{ResourceIndex(rng() % 12), a, static_cast<double>(rng() % 60)};
      place_reservation(table, r.agent, r.resource, r.t_arrival);
      by_agent[a.value] = r;
    }
    std::set<std::uint32_t> holders;
    std::size_t listed = 0;
    for (std::size_t res = 0; res < 12; ++res) {
      for (const Reservation& r : table.on_resource(ResourceIndex(res))) {
        violations += !holders.insert(r.agent.value).second;
        ++listed;
      }
    }
    violations += listed != by_agent.size() || table.size() != by_agent.size() || !table.consistent();

    const ResourceIndex q(rng() % 12);
    const AgentId who(static_cast<std::uint32_t>(rng() % 40));
    const double when = static_cast<double>(rng() % 60);
    bool expected = false;
    for (const auto& [id, r] : by_agent) {
      expected = expected || (r.resource == q && r.agent != who &&
                              (r.t_arrival < when || (r.t_arrival == when && r.agent < who)));
    }
    violations += table.reserved_before(q, who, when) != expected;
  }
  for (const auto& [id, r] : by_agent) violations += table.of_agent(AgentId(id)) != r;
  return {violations == 0, fmt("2 x 10^4 operations, %ld violations", violations)};
}

}  // namespace

int main(int argc, char** argv) {
  const int seeds = argc > 1 ? std::stoi(argv[1]) : 20;
  check(1, "CTMC correctness", ctmc_correctness);
  check(2, "stationary availability", stationary_availability);
  check(3, "oracle equivalences", oracle_equivalences);
  check(4, "hindsight lower bound", hindsight_lower_bound);

  Study study;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    study = run_study(seeds);
  } catch (const std::exception& e) {
    std::printf("grid study failed: %s\n", e.what());
  }
  std::printf("grid study: %d seeds x 7 planners in %.1f s\n", seeds,
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  check(5, "competition benefit", [&] { return competition_benefit(study); });
  check(6, "unsuccessful claims", [&] { return fewer_claims(study); });
  check(7, "baseline ordering", [&] { return baseline_ordering(study); });
  check(8, "computation-time ordering", [&] { return computation_ordering(study); });
  check(9, "determinism", determinism);
  check(10, "reversal and uniqueness", reversal_and_uniqueness);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
