#include "psfm/geometry/triangulation.h"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace psfm {

Eigen::Vector3d ViewingRay(const CameraIntrinsics& intr,
                           const CameraPose& pose,
                           const Eigen::Vector2d& pixel) {
  const Eigen::Vector2d n = intr.ImageToNormalized(pixel);
  return (pose.rotation.transpose() * Eigen::Vector3d(n.x(), n.y(), 1.0))
      .normalized();
}

double TriangulationAngle(const Eigen::Vector3d& center1,
                          const Eigen::Vector3d& center2,
                          const Point3& point) {
  return AngleBetween(center1 - point, center2 - point);
}

Expected<Point3> TriangulatePoint(
    std::span<const TriangulationObservation> observations,
    const TriangulationOptions& options) {
  if (observations.size() < 2) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "triangulation needs at least two observations");
  }

  const double min_angle = options.min_tri_angle_deg * std::numbers::pi / 180;
  double max_angle = 0.0;
  std::vector<Eigen::Vector3d> rays;
  rays.reserve(observations.size());
  for (const auto& obs : observations) {
    rays.push_back(ViewingRay(obs.intrinsics, obs.pose, obs.pixel));
  }
  for (std::size_t i = 0; i < rays.size(); ++i) {
    for (std::size_t j = i + 1; j < rays.size(); ++j) {
      max_angle = std::max(max_angle, AngleBetween(rays[i], rays[j]));
    }
  }
  if (max_angle < min_angle) {
    return MakeError(ErrorCode::kDegenerate, "viewing rays nearly parallel");
  }

  Eigen::MatrixXd a(2 * observations.size(), 4);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    Eigen::Matrix<double, 3, 4> proj;
    proj.leftCols<3>() = obs.pose.rotation;
    proj.col(3) = obs.pose.translation;
    const Eigen::Vector2d n = obs.intrinsics.ImageToNormalized(obs.pixel);
    a.row(2 * i) = n.x() * proj.row(2) - proj.row(0);
    a.row(2 * i + 1) = n.y() * proj.row(2) - proj.row(1);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d h = svd.matrixV().col(3);
  if (std::abs(h(3)) < 1e-14 * h.head<3>().norm()) {
    return MakeError(ErrorCode::kDegenerate, "point at infinity");
  }
  const Point3 point = h.head<3>() / h(3);
  if (!point.allFinite()) {
    return MakeError(ErrorCode::kDegenerate, "non-finite triangulation");
  }
  for (const auto& obs : observations) {
    if (!(obs.pose.Transform(point).z() > 0)) {
      return MakeError(ErrorCode::kCheirality,
                       "triangulated point behind a camera");
    }
  }
  return point;
}

}  // namespace psfm
