#pragma once

#include <span>
#include <vector>

#include "psfm/geometry/camera.h"
#include "psfm/util/expected.h"

namespace psfm {

// x' = scale * rotation * x + translation.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static SimilarityTransform Identity() { return {}; }

  Point3 Apply(const Point3& x) const {
    return scale * (rotation * x) + translation;
  }
  SimilarityTransform Inverse() const;
  // (*this) after `other`: x -> this(other(x)).
  SimilarityTransform Compose(const SimilarityTransform& other) const;
  // Re-expresses a world-to-camera pose in the transformed world frame.
  CameraPose ApplyToPose(const CameraPose& pose) const;
  Eigen::Matrix4d Matrix() const;
};

struct SimilarityEstimate {
  SimilarityTransform transform;
  // Mean squared residual of the fit over all pairs.
  double mse = 0.0;
};

// Closed-form least-squares similarity mapping src onto dst. Fails on fewer
// than three pairs, mismatched sizes, or (near-)collinear source points.
Expected<SimilarityEstimate> EstimateSimilarityUmeyama(
    std::span<const Point3> src, std::span<const Point3> dst);

// Mean squared 3D residual of `transform` over the given pairs.
double SimilarityMse(const SimilarityTransform& transform,
                     std::span<const Point3> src,
                     std::span<const Point3> dst);

}  // namespace psfm
