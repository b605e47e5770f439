#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psfm/geometry/camera.h"
#include "psfm/util/expected.h"

namespace psfm {

struct ResectionOptions {
  // Reprojection threshold in pixels.
  double max_error_px = 4.0;
  double confidence = 0.999;
  std::size_t max_iterations = 2000;
  int refine_iterations = 30;
  std::uint64_t seed = 0;
};

struct ResectionResult {
  CameraPose pose;
  std::vector<char> inlier_mask;
  std::size_t num_inliers = 0;
};

// Linear DLT pose from at least six 3D-2D correspondences; the rotation is
// projected onto SO(3). Returns an error for degenerate configurations.
Expected<CameraPose> EstimatePoseDlt(std::span<const Point3> points,
                                     std::span<const Eigen::Vector2d> pixels,
                                     const CameraIntrinsics& intr);

// Calibrated three-point pose (Grunert's quartic). Up to four solutions,
// empty for collinear points or no real root.
std::vector<CameraPose> EstimatePoseP3P(std::span<const Point3> points,
                                        std::span<const Eigen::Vector2d> pixels,
                                        const CameraIntrinsics& intr);

// Gauss-Newton/LM refinement of a single pose on the given correspondences.
CameraPose RefinePose(const CameraPose& initial,
                      std::span<const Point3> points,
                      std::span<const Eigen::Vector2d> pixels,
                      const CameraIntrinsics& intr, int max_iterations);

// P3P inside RANSAC, refined on the inliers by per-camera LM. At least six
// correspondences are required.
Expected<ResectionResult> ResectCamera(std::span<const Point3> points,
                                       std::span<const Eigen::Vector2d> pixels,
                                       const CameraIntrinsics& intr,
                                       const ResectionOptions& options = {});

}  // namespace psfm
