#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "parksearch/scenario.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace parksearch {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::for_all;
using testing::offset_m;
using testing::reference_dbscan;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("parksearch_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json tiny_grid_config() {
  return json::parse(R"({
    "name": "tiny",
    "graph": {"grid": {"rows": 3, "cols": 3, "resources": 8, "seed": 4}},
    "occupations": {"synthetic": {}},
    "ctmc": {"lambda_inv_s": 120, "mu_inv_s": 600},
    "destinations": {"mode": "single", "start_node": "n0_0", "lat": -37.8127, "lon": 144.9642, "agents": 4},
    "planners": ["rpl", "rpl_r"],
    "seeds": [1, 2],
    "record_wall_clock": false
  })");
}

// ------------------------------------------------------------------- grid

TEST(Grid, ShapeAndDriveTimes) {
  Rng rng(1);
  GridSpec spec;
  spec.rows = 3;
  spec.cols = 4;
  spec.resources = 17;
  const RoadGraph g = make_grid_graph(spec, rng);
  EXPECT_EQ(g.node_count(), 12u);
  EXPECT_EQ(g.edge_count(), 2u * (3 * 3 + 4 * 2));
  EXPECT_EQ(g.resource_count(), 17u);
  // 100 m at a quarter of 30 km/h
  for (const Edge& e : g.edges()) EXPECT_NEAR(e.drive_time_s, 48.0, 0.01);
  for (const Resource& r : g.resources()) {
    EXPECT_NEAR(r.round_trip_s, 192.0, 1e-9);
    EXPECT_GT(r.offset_s, 0.0);
    EXPECT_LT(r.offset_s, g.edge(r.edge).drive_time_s);
  }
  spec.rows = 1;
  EXPECT_THROW(make_grid_graph(spec, rng), ConfigError);
}

// ----------------------------------------------------------------- config

TEST(Config, ParsesAndEchoes) {
  const fs::path dir = fresh_dir("config_echo");
  const ScenarioConfig c = parse_scenario_config(tiny_grid_config(), dir);
  EXPECT_EQ(c.name, "tiny");
  ASSERT_TRUE(c.grid);
  EXPECT_EQ(c.grid->rows, 3);
  EXPECT_EQ(c.grid_seed, 4u);
  EXPECT_NEAR(1.0 / c.ctmc.mu, 600.0, 1e-9);
  EXPECT_EQ(c.destinations.single.agents, 4);
  EXPECT_EQ(c.planners, (std::vector<PlannerKind>{PlannerKind::rpl, PlannerKind::rpl_r}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_FALSE(c.record_wall_clock);
  // every default is written out and reads back the same
  const json echoed = to_json(c);
  EXPECT_EQ(to_json(parse_scenario_config(echoed, dir)), echoed);
  EXPECT_TRUE(echoed.contains("adaption"));
  EXPECT_EQ(echoed["hs"]["determinizations"], 100);
}

TEST(Config, SeedRangeAndFileName) {
  const fs::path dir = fresh_dir("config_file");
  json doc = tiny_grid_config();
  doc.erase("name");
  doc["seeds"] = {{"first", 5}, {"count", 3}};
  std::ofstream(dir / "downtown.json") << doc.dump();
  const ScenarioConfig c = load_scenario_config(dir / "downtown.json");
  EXPECT_EQ(c.name, "downtown");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{5, 6, 7}));
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
  const fs::path dir = fresh_dir("config_paths");
  Rng rng(2);
  const RoadGraph g = make_grid_graph(GridSpec{}, rng);
  std::ofstream(dir / "g.json") << to_json(g).dump();
  json doc = tiny_grid_config();
  doc["graph"] = "g.json";
  const ScenarioConfig c = parse_scenario_config(doc, dir);
  EXPECT_EQ(*c.graph_path, dir / "g.json");
  doc["graph"] = "missing.json";
  EXPECT_THROW(parse_scenario_config(doc, dir), ConfigError);
}

TEST(Config, Errors) {
  const fs::path dir = fresh_dir("config_errors");
  auto broken = [&](auto edit) {
    json doc = tiny_grid_config();
    edit(doc);
    return doc;
  };
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d["colour"] = "red"; }), dir), ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d.erase("destinations"); }), dir), ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d.erase("graph"); }), dir), ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d["occupations"]["trace"] = "t.csv"; }), dir),
               ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d["planners"] = {"taxi"}; }), dir), ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d["planners"] = json::array(); }), dir), ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d["destinations"]["mode"] = "nearby"; }), dir),
               ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d["hs"] = {{"determinizations", 0}}; }), dir),
               ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d["seeds"] = json::array(); }), dir), ConfigError);
  EXPECT_THROW(parse_scenario_config(broken([](json& d) { d["destinations"] = {{"mode", "explicit"}, {"agents", json::array()}}; }), dir),
               ConfigError);
  EXPECT_THROW(load_scenario_config(dir / "nope.json"), ConfigError);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_scenario_config(dir / "bad.json"), ConfigError);
}

// ------------------------------------------------------------- generation

TEST(SingleDestination, AgentCounts) {
  Rng rng(3);
  const RoadGraph g = make_grid_graph(GridSpec{}, rng);
  SingleDestination s{"n0_0", GeoPoint{-37.81, 144.96}, 20, 30.0};
  const auto agents = generate_single_destination(s, g, PlannerKind::hs);
  ASSERT_EQ(agents.size(), 20u);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    EXPECT_EQ(agents[i].id, AgentId(i));
    EXPECT_EQ(agents[i].start_node, agents[0].start_node);
    EXPECT_EQ(agents[i].destination, s.destination);
    EXPECT_EQ(agents[i].start_time, 30.0);
  }
  s.agents = 1;
  EXPECT_EQ(generate_single_destination(s, g, PlannerKind::hs).size(), 1u);
  s.agents = 0;
  EXPECT_THROW(generate_single_destination(s, g, PlannerKind::hs), ConfigError);
  s.agents = 5;
  s.start_node = "nowhere";
  EXPECT_THROW(generate_single_destination(s, g, PlannerKind::hs), ConfigError);
}

TEST(Dbscan, Examples) {
  const GeoPoint origin{48.0, 11.0};
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(offset_m(origin, i * 2.0, 0.0));
  for (int i = 0; i < 10; ++i) pts.push_back(offset_m(origin, 1000.0 + i * 2.0, 0.0));
  auto clusters = dbscan(pts, 100.0, 5);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0].members.size(), 10u);
  EXPECT_EQ(clusters[1].members.size(), 10u);
  EXPECT_EQ(clusters[1].members.front(), 10u);

  std::vector<GeoPoint> sparse;
  for (int i = 0; i < 6; ++i) sparse.push_back(offset_m(origin, i * 500.0, 0.0));
  EXPECT_TRUE(dbscan(sparse, 100.0, 2).empty());

  const std::vector<GeoPoint> one{origin};
  clusters = dbscan(one, 10.0, 1);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].members, std::vector<std::size_t>{0});

  EXPECT_THROW(dbscan(one, 0.0, 1), ConfigError);
  EXPECT_THROW(dbscan(one, 10.0, 0), ConfigError);
}

TEST(Dbscan, BorderPointGoesToFirstCluster) {
  // two dense groups 150 m apart with a lone point 75 m from both
  const GeoPoint origin{0.0, 0.0};
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(offset_m(origin, 0.0, -i * 5.0));
  for (int i = 0; i < 4; ++i) pts.push_back(offset_m(origin, 0.0, 150.0 + i * 5.0));
  pts.push_back(offset_m(origin, 0.0, 75.0));
  const auto clusters = dbscan(pts, 77.0, 4);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0].members.back(), 8u);
  EXPECT_EQ(clusters[1].members.size(), 4u);
}

TEST(Dbscan, MatchesBruteForceReference) {
  for_all(40, 61, [](Rng& rng, int) {
    const GeoPoint origin{testing::uniform_real(rng, -60, 60), testing::uniform_real(rng, -170, 170)};
    const int n = testing::uniform_int(rng, 1, 500);
    std::vector<GeoPoint> pts;
    const int centers = testing::uniform_int(rng, 1, 6);
    std::vector<GeoPoint> c;
    for (int i = 0; i < centers; ++i) {
      c.push_back(offset_m(origin, testing::uniform_real(rng, 0, 2000), testing::uniform_real(rng, 0, 2000)));
    }
    for (int i = 0; i < n; ++i) {
      const double spread = rng() % 4 == 0 ? 2000.0 : 150.0;
      pts.push_back(offset_m(c[rng() % c.size()], testing::uniform_real(rng, -spread, spread) / 2,
                             testing::uniform_real(rng, -spread, spread) / 2));
    }
    const double eps = testing::uniform_real(rng, 20.0, 150.0);
    const int min_pts = testing::uniform_int(rng, 1, 12);
    const auto got = dbscan(pts, eps, min_pts);
    const auto want = reference_dbscan(pts, eps, min_pts);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_EQ(got[k].label, static_cast<int>(k));
      EXPECT_EQ(got[k].members, want[k]);
      ASSERT_EQ(got[k].points.size(), got[k].members.size());
      for (std::size_t m = 0; m < got[k].members.size(); ++m) EXPECT_EQ(got[k].points[m], pts[got[k].members[m]]);
    }
  });
}

// One hour with a 729-point cluster, a 63-point cluster and scattered noise.
std::vector<OccupationPoint> two_cluster_events(const GeoPoint& a, const GeoPoint& b, Rng& rng) {
  std::vector<OccupationPoint> ev;
  for (int i = 0; i < 729; ++i) {
    ev.push_back({offset_m(a, testing::uniform_real(rng, -40, 40), testing::uniform_real(rng, -40, 40)),
                  7200.0 + testing::uniform_real(rng, 0, 3599)});
  }
  for (int i = 0; i < 63; ++i) {
    ev.push_back({offset_m(b, testing::uniform_real(rng, -30, 30), testing::uniform_real(rng, -30, 30)),
                  7200.0 + testing::uniform_real(rng, 0, 3599)});
  }
  for (int i = 0; i < 5; ++i) {
    ev.push_back({offset_m(a, 3000.0 + 800.0 * i, -3000.0), 7200.0 + 100.0 * i});
  }
  return ev;
}

TEST(DataDriven, OneAgentPerClusterMember) {
  Rng grid_rng(5);
  const RoadGraph g = make_grid_graph(GridSpec{}, grid_rng);
  const GeoPoint a = g.node(NodeIndex(11)).position;
  const GeoPoint b = offset_m(a, 2000.0, 2000.0);
  Rng rng(62);
  const auto events = two_cluster_events(a, b, rng);

  DataDrivenDestinations cfg{"n0_0", 100.0, 10, std::vector<int>{2}, 1};
  Rng gen(63);
  DataDrivenResult r = generate_data_driven(cfg, g, events, PlannerKind::rpl, gen);
  EXPECT_EQ(r.agents.size(), 729u);
  EXPECT_TRUE(r.warnings.empty());

  cfg.clusters = 2;
  r = generate_data_driven(cfg, g, events, PlannerKind::rpl, gen);
  ASSERT_EQ(r.agents.size(), 792u);
  for (std::size_t i = 0; i < r.agents.size(); ++i) {
    const AgentSpec& s = r.agents[i];
    EXPECT_EQ(s.id, AgentId(i));
    EXPECT_EQ(s.start_node, *g.find_node("n0_0"));
    EXPECT_GE(s.start_time, 7200.0);
    EXPECT_LT(s.start_time, 10800.0);
    // inside the eps-neighborhood of its own cluster
    const GeoPoint& centre = i < 729 ? a : b;
    EXPECT_LT(great_circle_distance(s.destination, centre), 100.0 + 60.0);
  }
}

TEST(DataDriven, EmptyHoursAndSelections) {
  Rng grid_rng(6);
  const RoadGraph g = make_grid_graph(GridSpec{}, grid_rng);
  Rng rng(64);
  const auto events = two_cluster_events(g.node(NodeIndex(0)).position, g.node(NodeIndex(99)).position, rng);

  DataDrivenDestinations cfg{"n0_0", 100.0, 10, std::vector<int>{5}, std::nullopt};
  DataDrivenResult r = generate_data_driven(cfg, g, events, PlannerKind::rpl, rng);
  EXPECT_TRUE(r.agents.empty());
  ASSERT_EQ(r.warnings.size(), 1u);

  // density too low for any cluster
  cfg.hours = std::vector<int>{2};
  cfg.min_pts = 1000;
  r = generate_data_driven(cfg, g, events, PlannerKind::rpl, rng);
  EXPECT_TRUE(r.agents.empty());
  EXPECT_EQ(r.warnings.size(), 1u);
  cfg.clusters = 1;
  EXPECT_THROW(generate_data_driven(cfg, g, events, PlannerKind::rpl, rng), ConfigError);
  EXPECT_THROW(generate_data_driven(cfg, g, {}, PlannerKind::rpl, rng), ConfigError);
}

TEST(DataDriven, OccupationPointsAreSwitchesToOccupied) {
  Rng grid_rng(7);
  GridSpec spec;
  spec.resources = 3;
  const RoadGraph g = make_grid_graph(spec, grid_rng);
  OccupationTrace t{{ResourceState::available, ResourceState::occupied, ResourceState::available},
                    {{ResourceIndex(0), 10, ResourceState::occupied},
                     {ResourceIndex(1), 20, ResourceState::available},
                     {ResourceIndex(1), 30, ResourceState::occupied}}};
  const auto pts = occupation_points(g, t);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].position, g.resource(ResourceIndex(0)).position);
  EXPECT_EQ(pts[1].time, 30.0);
}

// -------------------------------------------------------------- execution

TEST(Prepared, InputsArePureInSeed) {
  const fs::path dir = fresh_dir("prepared");
  const PreparedScenario p(parse_scenario_config(tiny_grid_config(), dir));
  const auto a = p.inputs(11);
  const auto b = p.inputs(11);
  const auto c = p.inputs(12);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_NE(a.trace, c.trace);
  EXPECT_EQ(a.agents.size(), 4u);
  EXPECT_EQ(p.run(a, PlannerKind::rpl, 11), p.run(b, PlannerKind::rpl, 11));
}

TEST(Batch, WritesResultsAndSummary) {
  const fs::path dir = fresh_dir("batch_single");
  const ScenarioConfig c = parse_scenario_config(tiny_grid_config(), dir);
  const BatchReport r = run_scenario(c, dir / "out", 2);
  EXPECT_TRUE(r.failures.empty());
  ASSERT_EQ(r.results_files.size(), 4u);
  for (const char* f : {"results_rpl_seed1.csv", "results_rpl_seed2.csv", "results_rpl_r_seed1.csv",
                        "results_rpl_r_seed2.csv", "summary.csv", "config.json"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }

  // the reduction recomputes from the results files
  std::map<PlannerKind, double> totals;
  std::map<PlannerKind, std::size_t> agents;
  for (const fs::path& f : r.results_files) {
    std::ifstream in(f);
    for (const MetricsRecord& m : read_results_csv(in)) {
      totals[m.planner] += m.parking_s;
      ++agents[m.planner];
    }
  }
  const auto rows = summarize_directory(dir / "out");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].agents, 8u);
  EXPECT_NEAR(rows[0].total_parking_s, totals[PlannerKind::rpl], 1e-6);
  ASSERT_TRUE(rows[1].reduction_pct);
  EXPECT_NEAR(*rows[1].reduction_pct,
              (totals[PlannerKind::rpl] - totals[PlannerKind::rpl_r]) / totals[PlannerKind::rpl] * 100.0, 1e-9);

  std::ifstream summary(dir / "out" / "summary.csv");
  std::string header;
  std::getline(summary, header);
  EXPECT_EQ(header, kSummaryHeader);
  EXPECT_EQ(json::parse(std::ifstream(dir / "out" / "config.json")), to_json(c));
}

TEST(Batch, FailingConfigDoesNotStopOthers) {
  const fs::path dir = fresh_dir("batch_many");
  fs::create_directories(dir / "configs");
  json good = tiny_grid_config();
  good.erase("name");
  good["planners"] = {"rpl"};
  good["seeds"] = {3};
  std::ofstream(dir / "configs" / "a_good.json") << good.dump();
  json bad = good;
  bad["destinations"]["start_node"] = "n9_9";
  std::ofstream(dir / "configs" / "b_bad.json") << bad.dump();
  std::ofstream(dir / "configs" / "c_broken.json") << "{";
  std::ofstream(dir / "configs" / "notes.txt") << "ignored";

  const BatchReport r = run_batch(dir / "configs", dir / "out");
  EXPECT_EQ(r.results_files.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "out" / "a_good" / "results_rpl_seed3.csv"));
  ASSERT_EQ(r.failures.size(), 2u);
  EXPECT_EQ(r.failures[0].scenario, "b_bad");
  EXPECT_EQ(r.failures[1].scenario, "c_broken");
  EXPECT_THROW(run_batch(dir / "nothing", dir / "out"), ConfigError);
  EXPECT_THROW(summarize_directory(dir / "configs"), ConfigError);
}

TEST(Batch, SummaryCsvFormat) {
  PlannerSummary base{PlannerKind::rpl, 2, 500.0, 1000.0, 4, 0, 0.5, 0.9, std::nullopt};
  PlannerSummary variant{PlannerKind::rpl_r, 2, 125.0, 250.0, 1, 0, 0.5, 0.9, 75.0};
  std::ostringstream out;
  const std::vector<PlannerSummary> rows{base, variant};
  write_summary_csv(out, rows);
  EXPECT_EQ(out.str(), std::string(kSummaryHeader) +
                           "\nrpl,2,500.000,1000.000,,4,0,0.500,0.900\n"
                           "rpl_r,2,125.000,250.000,75.000,1,0,0.500,0.900\n");
}

}  // namespace
}  // namespace parksearch
