// Serial reference vs OpenMP kernels: all-pairs travel times and the
// determinization solve of the hindsight planner.

#include <benchmark/benchmark.h>

#include "parksearch/planning.hpp"
#include "parksearch/scenario.hpp"
#include "parksearch/shortest_paths.hpp"
#include "parksearch/simulation.hpp"

namespace {

using namespace parksearch;

RoadGraph grid(int side) {
  GridSpec spec;
  spec.rows = side;
  spec.cols = side;
  spec.resources = side * side * 3 / 2;
  Rng rng(1);
  return make_grid_graph(spec, rng);
}

void BM_AllPairsSerial(benchmark::State& state) {
  const RoadGraph g = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(all_pairs_travel_times_serial(g));
}

void BM_AllPairsParallel(benchmark::State& state) {
  const RoadGraph g = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(all_pairs_travel_times(g));
}

BENCHMARK(BM_AllPairsSerial)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AllPairsParallel)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

struct SolveFixture {
  RoadGraph graph = grid(20);
  TravelTimeMatrix matrix = all_pairs_travel_times(graph);
  std::vector<ResourceState> states;
  std::vector<CtmcParams> params = resource_params(graph, CtmcParams::from_mean_sojourns(120.0, 2091.0));
  std::vector<double> claim_wait = resource_claim_waits(graph, params);
  std::vector<double> terminal = terminal_costs(graph, graph.node(NodeIndex(210)).position);

  SolveFixture() {
    Rng rng(2);
    for (std::size_t i = 0; i < graph.resource_count(); ++i) {
      states.push_back(bernoulli(rng, 0.054) ? ResourceState::available : ResourceState::occupied);
    }
  }

  PlanningView view() const {
    PlanningView v;
    v.graph = &graph;
    v.matrix = &matrix;
    v.states = states;
    v.params = params;
    v.claim_wait = claim_wait;
    v.terminal_costs = terminal;
    return v;
  }
};

void BM_SolveSerial(benchmark::State& state) {
  const SolveFixture fx;
  const auto set = sample_determinizations_seeded(fx.view(), NodeIndex(0), static_cast<int>(state.range(0)), 3, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_determinizations_serial(fx.view(), set));
}

void BM_SolveParallel(benchmark::State& state) {
  const SolveFixture fx;
  const auto set = sample_determinizations_seeded(fx.view(), NodeIndex(0), static_cast<int>(state.range(0)), 3, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_determinizations(fx.view(), set));
}

BENCHMARK(BM_SolveSerial)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SolveParallel)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
