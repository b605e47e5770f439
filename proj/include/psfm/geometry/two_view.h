#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "psfm/geometry/camera.h"
#include "psfm/util/expected.h"

namespace psfm {

struct RelativePoseOptions {
  // Sampson distance threshold in pixels.
  double max_error_px = 4.0;
  double confidence = 0.999;
  std::size_t max_iterations = 2000;
  // The adaptive stop is not trusted before this many samples: a planar
  // scene's wrong solution can look like a full consensus.
  std::size_t min_iterations = 100;
  // Fraction of inliers that must triangulate in front of both cameras.
  double min_cheirality_ratio = 0.5;
  std::uint64_t seed = 0;
};

struct RelativePoseResult {
  // Pose of the second camera with the first at the origin; |t| = 1.
  CameraPose pose;
  Eigen::Matrix3d essential = Eigen::Matrix3d::Zero();
  std::vector<char> inlier_mask;
  std::size_t num_inliers = 0;
};

// Normalized eight-point estimate from normalized image coordinates. The
// result satisfies the essential-matrix singular value constraint. Returns
// nullopt if the correspondences do not determine a unique solution.
std::optional<Eigen::Matrix3d> EstimateEssentialEightPoint(
    std::span<const Eigen::Vector2d> normalized1,
    std::span<const Eigen::Vector2d> normalized2);

// Calibrated five-point solver: all real essential matrices (up to ten)
// consistent with exactly five normalized correspondences.
std::vector<Eigen::Matrix3d> EstimateEssentialFivePoint(
    std::span<const Eigen::Vector2d> normalized1,
    std::span<const Eigen::Vector2d> normalized2);

// Squared Sampson distance of one correspondence to a fundamental matrix.
double SampsonErrorSquared(const Eigen::Matrix3d& fundamental,
                           const Eigen::Vector2d& x1,
                           const Eigen::Vector2d& x2);

// The four (R, t) factorizations of an essential matrix.
std::vector<CameraPose> DecomposeEssential(const Eigen::Matrix3d& essential);

// RANSAC over the five-point essential matrix, Sampson-error refinement of
// (R, t) on the inliers, then the cheirality test that picks the physical
// factorization. Inlier sets whose epipolar constraints have rank below six
// (all points on one line per image) are rejected as degenerate.
Expected<RelativePoseResult> EstimateRelativePose(
    std::span<const Eigen::Vector2d> pixels1,
    std::span<const Eigen::Vector2d> pixels2,
    const CameraIntrinsics& intr1, const CameraIntrinsics& intr2,
    const RelativePoseOptions& options = {});

}  // namespace psfm
