#pragma once

#include <iosfwd>
#include <vector>

#include "psfm/matchgraph/match_graph.h"

namespace psfm {

struct WcdsResult {
  // Black vertices in the order they were scanned.
  std::vector<image_t> selected_vertices;
  MatchGraph induced_subgraph;
  // For every selected vertex except the first of each component, the edge
  // through which it joined (its strongest edge to the black set at that
  // time). These form a spanning tree of each component's skeleton.
  std::vector<GraphEdge> tree_edges;
  double r_vw = 0.5;
};

// Greedy weighted connected dominating set, run per connected component
// (components in order of their smallest id).
//
// Every vertex starts white. The first current vertex of a component is the
// one with most white neighbours. Scanning turns the current vertex black
// and its white neighbours gray. The next current vertex is the gray vertex
// maximizing
//   r_vw * N_white / N_max + (1 - r_vw) * (max edge weight to a black vertex)
// where N_max is the largest neighbour count in the whole input graph. Ties
// go to the lowest id. Stops when no white vertex remains.
//
// Throws std::invalid_argument unless r_vw is in [0, 1].
WcdsResult ExtractWcds(const MatchGraph& graph, double r_vw = 0.5);

// `WCDS id id ...`
void WriteWcds(const WcdsResult& result, std::ostream& out);

}  // namespace psfm
