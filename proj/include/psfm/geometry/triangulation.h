#pragma once

#include <span>

#include "psfm/geometry/camera.h"
#include "psfm/util/expected.h"

namespace psfm {

struct TriangulationObservation {
  CameraIntrinsics intrinsics;
  CameraPose pose;
  Eigen::Vector2d pixel;
};

struct TriangulationOptions {
  // Minimum of the largest pairwise angle between viewing rays.
  double min_tri_angle_deg = 2.0;
};

// Linear (DLT) multi-view triangulation in normalized image coordinates.
Expected<Point3> TriangulatePoint(
    std::span<const TriangulationObservation> observations,
    const TriangulationOptions& options = {});

// World-frame direction of the viewing ray through `pixel`.
Eigen::Vector3d ViewingRay(const CameraIntrinsics& intr,
                           const CameraPose& pose,
                           const Eigen::Vector2d& pixel);

// Angle at `point` subtended by two camera centers, in radians.
double TriangulationAngle(const Eigen::Vector3d& center1,
                          const Eigen::Vector3d& center2,
                          const Point3& point);

}  // namespace psfm
