#pragma once

#include <vector>

#include "psfm/matchgraph/match_graph.h"

namespace psfm {

// Maximal connected vertex sets. Each set is sorted; sets are ordered by
// their smallest vertex id.
std::vector<std::vector<image_t>> ConnectedComponents(const MatchGraph& graph);

// Same, restricted to the subgraph induced by `vertices`.
std::vector<std::vector<image_t>> ConnectedComponents(
    const MatchGraph& graph, const std::vector<image_t>& vertices);

bool IsConnected(const MatchGraph& graph, const std::vector<image_t>& vertices);

}  // namespace psfm
