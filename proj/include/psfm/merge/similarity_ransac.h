#pragma once

#include <cstdint>
#include <vector>

#include "psfm/geometry/similarity.h"
#include "psfm/merge/common_points.h"
#include "psfm/util/expected.h"

namespace psfm {

// Bi-directional reprojection residual of one common pair in pixels: the
// source point mapped by T into every reference camera observing the
// reference point, and the reference point mapped by T^-1 into every source
// camera observing the source point, RMS over all m + l projections.
// Infinite if any projection lands behind its camera.
double TransformResidual(const CommonPointPair& pair,
                         const SimilarityTransform& source_to_reference,
                         const Reconstruction& source,
                         const Reconstruction& reference);

struct SimilarityRansacOptions {
  double threshold_px = 1.8;
  double confidence = 0.999;
  std::size_t max_iterations = 10000;
  double min_inlier_ratio = 0.2;
  std::uint64_t seed = 0;
};

struct SimilarityRansacResult {
  SimilarityTransform transform;
  std::vector<char> inlier_mask;
  std::size_t num_inliers = 0;
  double inlier_ratio = 0;
  // 3D mean squared error of the final fit on the inliers.
  double mse = 0;
  std::size_t iterations = 0;
};

// Similarity from source into reference frame by RANSAC over common point
// pairs (minimal sample of 3, scored by TransformResidual), re-estimated on
// all inliers. Fewer than three pairs is kInvalidArgument; too few inliers
// is kNoConsensus.
Expected<SimilarityRansacResult> EstimateSimilarityRansac(
    const CommonPointSet& common, const Reconstruction& source,
    const Reconstruction& reference, const SimilarityRansacOptions& options);

}  // namespace psfm
