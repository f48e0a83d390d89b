#include "parksearch/shortest_paths.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace parksearch {

namespace {

void dijkstra_into(const RoadGraph& graph, NodeIndex source, std::span<double> dist) {
  std::fill(dist.begin(), dist.end(), kUnreachable);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[source.get()] = 0.0;
  open.emplace(0.0, source.value);
  while (!open.empty()) {
    auto [d, u] = open.top();
    open.pop();
    if (d > dist[u]) continue;
    for (EdgeIndex e : graph.out_edges(NodeIndex(u))) {
      const Edge& edge = graph.edge(e);
      const double candidate = d + edge.drive_time_s;
      if (candidate < dist[edge.to.get()]) {
        dist[edge.to.get()] = candidate;
        open.emplace(candidate, edge.to.value);
      }
    }
  }
}

}  // namespace

std::vector<double> single_source_travel_times(const RoadGraph& graph, NodeIndex source) {
  std::vector<double> dist(graph.node_count());
  dijkstra_into(graph, source, dist);
  return dist;
}

TravelTimeMatrix all_pairs_travel_times(const RoadGraph& graph) {
  const auto n = static_cast<std::int64_t>(graph.node_count());
  TravelTimeMatrix matrix(graph.node_count());
#pragma omp parallel for schedule(dynamic, 16) num_threads(kernel_threads())
  for (std::int64_t s = 0; s < n; ++s) {
    dijkstra_into(graph, NodeIndex(static_cast<std::uint32_t>(s)),
                  matrix.row(NodeIndex(static_cast<std::uint32_t>(s))));
  }
  return matrix;
}

TravelTimeMatrix all_pairs_travel_times_serial(const RoadGraph& graph) {
  TravelTimeMatrix matrix(graph.node_count());
  for (std::size_t s = 0; s < graph.node_count(); ++s) {
    dijkstra_into(graph, NodeIndex(s), matrix.row(NodeIndex(s)));
  }
  return matrix;
}

namespace {
int& thread_setting() {
#ifdef _OPENMP
  static int threads = omp_get_max_threads();
#else
  static int threads = 1;
#endif
  return threads;
}
}  // namespace

int kernel_threads() { return thread_setting(); }

void set_kernel_threads(int threads) { thread_setting() = std::max(1, threads); }

}  // namespace parksearch
