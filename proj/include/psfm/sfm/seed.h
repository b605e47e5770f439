#pragma once

#include <vector>

#include "psfm/geometry/triangulation.h"
#include "psfm/geometry/two_view.h"
#include "psfm/matchgraph/dataset.h"
#include "psfm/util/expected.h"

namespace psfm {

struct SeedOptions {
  double min_median_angle_deg = 4.0;
  // Only the strongest pairs are tried before falling back.
  std::size_t max_candidates = 50;
  std::size_t min_inliers = 30;
  RelativePoseOptions pose;
  TriangulationOptions triangulation = [] {
    TriangulationOptions o;
    o.min_tri_angle_deg = 0.0;
    return o;
  }();
};

struct SeedResult {
  image_t image_a = 0;
  image_t image_b = 0;
  // Pose of b relative to a, unit translation.
  CameraPose relative_pose;
  std::vector<FeatureMatch> inliers;
  double median_angle_deg = 0;
  // No candidate reached the angle threshold; the strongest pair was used.
  bool fallback = false;
};

// Median triangulation angle (degrees) of a two-view configuration over the
// inlier matches that triangulate in front of both cameras; 0 if none do.
double MedianTriangulationAngle(const MatchPair& pair, const Dataset& dataset,
                                const CameraPose& relative_pose,
                                const std::vector<char>& inlier_mask,
                                const TriangulationOptions& options);

// Ranks pairs by inlier count (descending, ties by image ids) and returns the
// first whose two-view geometry has a median triangulation angle of at least
// min_median_angle_deg. Errors if no pair yields a relative pose.
Expected<SeedResult> SelectSeedPair(const std::vector<MatchPair>& pairs,
                                    const Dataset& dataset,
                                    const SeedOptions& options);

}  // namespace psfm
