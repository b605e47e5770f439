#pragma once

#include <set>
#include <unordered_map>
#include <vector>

#include "psfm/geometry/reconstruction.h"
#include "psfm/matchgraph/dataset.h"

namespace psfm {

// Keypoints (at most one per image) linked by a chain of matches. Elements
// are sorted by (image, keypoint).
struct Track {
  std::vector<ImageKeypoint> elements;

  std::size_t Length() const { return elements.size(); }
  // kNoKeypoint if the track has no element in this image.
  std::uint32_t KeypointIn(image_t image_id) const;
};

// Union-find over (image, keypoint) nodes joined by the matches of `pairs`.
// If `subset` is given only pairs with both images in it are used. Tracks
// holding two keypoints of one image are discarded, as are tracks shorter
// than two. Tracks are ordered by their first element.
std::vector<Track> BuildTracks(const std::vector<MatchPair>& pairs,
                               const std::set<image_t>* subset = nullptr);

using TrackIndex = std::unordered_map<ImageKeypoint, std::size_t,
                                      ImageKeypointHash>;
TrackIndex IndexTracks(const std::vector<Track>& tracks);

}  // namespace psfm
