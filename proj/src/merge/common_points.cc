#include "psfm/merge/common_points.h"

#include <map>

namespace psfm {

CommonPointSet FindCommonPoints(const CorrespondenceGraph& graph,
                                const Reconstruction& source,
                                const Reconstruction& reference) {
  const auto reference_index = reference.BuildObservationIndex();
  CommonPointSet common;
  for (const auto& [source_id, point] : source.points) {
    std::map<point3D_t, std::size_t> votes;
    for (const auto& obs : point.observations) {
      if (obs.keypoint_idx == kNoKeypoint) continue;
      for (const auto& target :
           graph.Links({obs.image_id, obs.keypoint_idx})) {
        const auto it = reference_index.find(target);
        if (it != reference_index.end()) ++votes[it->second];
      }
    }
    if (votes.empty()) continue;
    // std::map iterates ids ascending, so strict > keeps the lower id on ties.
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    CommonPointPair pair;
    pair.source_point = source_id;
    pair.reference_point = best->first;
    pair.support = best->second;
    pair.m = reference.points.at(best->first).observations.size();
    pair.l = point.observations.size();
    common.pairs.push_back(pair);
  }
  return common;
}

}  // namespace psfm
