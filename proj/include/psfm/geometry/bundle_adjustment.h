#pragma once

#include <optional>
#include <set>

#include "psfm/geometry/reconstruction.h"

namespace psfm {

struct BaOptions {
  int max_iterations = 100;
  // Stop when the largest gradient entry falls below this.
  double gradient_tolerance = 1e-10;
  // Stop when |step| <= parameter_tolerance * (|x| + parameter_tolerance).
  double parameter_tolerance = 1e-10;
  // Stop when an accepted step lowers the cost by less than this fraction.
  double function_tolerance = 1e-12;
  double initial_lambda = 1e-4;
  // Intrinsics are calibrated; there is no code path that refines them.
  bool fix_intrinsics = true;
  // Points whose coordinates are held constant (ground control points).
  std::set<point3D_t> fixed_point_ids;
  // Images whose poses are held constant.
  std::set<image_t> fixed_image_ids;
  // Restricts the problem to these points and their observations.
  std::optional<std::set<point3D_t>> point_subset;
  // Fix the first camera (and, without enough constant structure, one
  // translation component of the next camera to pin the scale).
  bool fix_gauge = true;
};

struct BaReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double initial_mean_error = 0.0;
  double final_mean_error = 0.0;
  int iterations = 0;
  int accepted_steps = 0;
  bool converged = false;
  std::size_t num_residuals = 0;
  std::size_t num_variable_images = 0;
  std::size_t num_variable_points = 0;
};

// Reprojection residual (projection minus observation) and its Jacobians for
// the update R <- Exp(omega) * R, t <- t + dt, X <- X + dX. The pose Jacobian
// columns are ordered [omega, dt]. Returns false when the point is behind
// the camera.
bool ComputeReprojectionJacobian(const CameraIntrinsics& intr,
                                 const CameraPose& pose, const Point3& point,
                                 const Eigen::Vector2d& observed,
                                 Eigen::Vector2d* residual,
                                 Eigen::Matrix<double, 2, 6>* jac_pose,
                                 Eigen::Matrix<double, 2, 3>* jac_point);

// Applies an increment [omega, dt] to a pose.
CameraPose UpdatePose(const CameraPose& pose,
                      const Eigen::Matrix<double, 6, 1>& delta);

// Levenberg-Marquardt minimization of the summed squared reprojection error
// with the camera/point Schur complement. Mutates `recon` in place.
BaReport BundleAdjust(Reconstruction& recon, const BaOptions& options);

}  // namespace psfm
