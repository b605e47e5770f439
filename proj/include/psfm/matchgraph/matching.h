#pragma once

#include <optional>
#include <vector>

#include "psfm/geometry/two_view.h"
#include "psfm/matchgraph/dataset.h"
#include "psfm/matchgraph/retrieval.h"

namespace psfm {

struct MatchingOptions {
  // Lowe ratio on descriptor distances (nearest / second nearest).
  double ratio = 0.8;
  // Pairs with fewer verified inliers are dropped.
  int min_inliers = 15;
  RelativePoseOptions pose = [] {
    RelativePoseOptions o;
    o.max_iterations = 20000;
    return o;
  }();
  int num_workers = 1;
};

// Mutual nearest neighbours between descriptor sets that also pass the
// ratio test in both directions. Sorted by idx_a.
std::vector<FeatureMatch> MatchDescriptors(const DescriptorMatrix& a,
                                           const DescriptorMatrix& b,
                                           double ratio);

// Putative matching plus geometric verification of one pair. Returns the
// inlier matches, or nothing if the pair cannot be verified.
std::optional<MatchPair> VerifyPair(image_t image_a, image_t image_b,
                                    const Dataset& dataset,
                                    const MatchingOptions& options);

// Restricts precomputed matches of one pair to the relative-pose inliers.
std::optional<MatchPair> VerifyMatches(const MatchPair& pair,
                                       const Dataset& dataset,
                                       const MatchingOptions& options);

// Verifies all candidates (in parallel); output is sorted by image pair.
std::vector<MatchPair> VerifyCandidates(
    const std::vector<CandidatePair>& candidates, const Dataset& dataset,
    const MatchingOptions& options);

}  // namespace psfm
