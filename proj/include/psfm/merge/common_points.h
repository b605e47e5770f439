#pragma once

#include <vector>

#include "psfm/merge/correspondence_graph.h"

namespace psfm {

struct CommonPointPair {
  point3D_t source_point = 0;
  point3D_t reference_point = 0;
  // Feature links supporting the pair.
  std::size_t support = 0;
  // Cameras observing the reference point (m) and the source point (l).
  std::size_t m = 0;
  std::size_t l = 0;
};

struct CommonPointSet {
  // Ordered by source point id.
  std::vector<CommonPointPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

// Follows each source point's observations through the correspondence
// graph to reference keypoints and from there to reference points. A source
// point reaching several reference points keeps the one with most links,
// ties going to the lower reference id.
CommonPointSet FindCommonPoints(const CorrespondenceGraph& graph,
                                const Reconstruction& source,
                                const Reconstruction& reference);

}  // namespace psfm
