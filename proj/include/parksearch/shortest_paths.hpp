#pragma once

#include <vector>

#include "parksearch/road_graph.hpp"

namespace parksearch {

/// Dijkstra from `source`; unreachable nodes get kUnreachable.
std::vector<double> single_source_travel_times(const RoadGraph& graph, NodeIndex source);

/// All-pairs least drive times, one Dijkstra per source row. Rows are
/// independent, so they are computed in an OpenMP parallel loop when OpenMP
/// is available. Result is identical to the serial variant.
TravelTimeMatrix all_pairs_travel_times(const RoadGraph& graph);

/// Single-threaded reference for all_pairs_travel_times.
TravelTimeMatrix all_pairs_travel_times_serial(const RoadGraph& graph);

/// Threads OpenMP kernels will use (1 without OpenMP).
int kernel_threads();
void set_kernel_threads(int threads);

}  // namespace parksearch
