#include "psfm/geometry/camera.h"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace psfm {

CameraIntrinsics CameraIntrinsics::Pinhole(double focal, double principal_x,
                                           double principal_y, int width,
                                           int height) {
  CameraIntrinsics intr;
  intr.focal_x = focal;
  intr.focal_y = focal;
  intr.principal_x = principal_x;
  intr.principal_y = principal_y;
  intr.image_width = width;
  intr.image_height = height;
  return intr;
}

bool CameraIntrinsics::IsValid() const {
  if (!(focal_x > 0) || !(focal_y > 0)) return false;
  if (principal_x < 0 || principal_y < 0) return false;
  if (image_width > 0 && principal_x > image_width) return false;
  if (image_height > 0 && principal_y > image_height) return false;
  return true;
}

Eigen::Matrix3d CameraIntrinsics::K() const {
  Eigen::Matrix3d k;
  k << focal_x, 0, principal_x, 0, focal_y, principal_y, 0, 0, 1;
  return k;
}

Eigen::Vector2d CameraIntrinsics::ImageToNormalized(
    const Eigen::Vector2d& pixel) const {
  return {(pixel.x() - principal_x) / focal_x,
          (pixel.y() - principal_y) / focal_y};
}

Eigen::Vector2d CameraIntrinsics::NormalizedToImage(
    const Eigen::Vector2d& normalized) const {
  return {focal_x * normalized.x() + principal_x,
          focal_y * normalized.y() + principal_y};
}

CameraPose CameraPose::FromQuaternion(const Eigen::Quaterniond& q,
                                      const Eigen::Vector3d& t) {
  CameraPose pose;
  pose.rotation = q.normalized().toRotationMatrix();
  pose.translation = t;
  return pose;
}

CameraPose CameraPose::FromCenter(const Eigen::Matrix3d& rotation,
                                  const Eigen::Vector3d& center) {
  CameraPose pose;
  pose.rotation = rotation;
  pose.translation = -rotation * center;
  return pose;
}

Eigen::Vector3d CameraPose::Center() const {
  return -rotation.transpose() * translation;
}

Eigen::Vector3d CameraPose::ViewingDirection() const {
  return rotation.row(2).transpose();
}

Eigen::Vector3d CameraPose::Transform(const Point3& world) const {
  return rotation * world + translation;
}

CameraPose CameraPose::Inverse() const {
  CameraPose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.rotation * translation;
  return inv;
}

Eigen::Quaterniond CameraPose::Quaternion() const {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1;
  return q;
}

std::optional<Eigen::Vector2d> ProjectPoint(const CameraIntrinsics& intr,
                                            const CameraPose& pose,
                                            const Point3& point) {
  const Eigen::Vector3d cam = pose.rotation * point + pose.translation;
  if (!(cam.z() > 0)) return std::nullopt;
  return Eigen::Vector2d(intr.focal_x * cam.x() / cam.z() + intr.principal_x,
                         intr.focal_y * cam.y() / cam.z() + intr.principal_y);
}

std::optional<double> SquaredReprojectionError(
    const CameraIntrinsics& intr, const CameraPose& pose, const Point3& point,
    const Eigen::Vector2d& observed) {
  const auto projected = ProjectPoint(intr, pose, point);
  if (!projected) return std::nullopt;
  return (*projected - observed).squaredNorm();
}

CameraPose RelativePose(const CameraPose& pose1, const CameraPose& pose2) {
  CameraPose rel;
  rel.rotation = pose2.rotation * pose1.rotation.transpose();
  rel.translation = pose2.translation - rel.rotation * pose1.translation;
  return rel;
}

double RotationAngularDistance(const Eigen::Matrix3d& a,
                               const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d delta = a * b.transpose();
  const double cos_angle = std::clamp((delta.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near zero; fall back to the skew part there.
  if (cos_angle > 0.99) {
    const Eigen::Vector3d axis(delta(2, 1) - delta(1, 2),
                               delta(0, 2) - delta(2, 0),
                               delta(1, 0) - delta(0, 1));
    return std::asin(std::min(1.0, 0.5 * axis.norm()));
  }
  return std::acos(cos_angle);
}

double AngleBetween(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0 || nb == 0) return 0;
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double RotationOrthonormalityError(const Eigen::Matrix3d& rotation) {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  return std::max(ortho, std::abs(rotation.determinant() - 1.0));
}

Eigen::Matrix3d NearestRotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) {
    d(2, 2) = -1;
  }
  return svd.matrixU() * d * svd.matrixV().transpose();
}

Eigen::Matrix3d SkewSymmetric(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Eigen::Matrix3d AngleAxisToRotation(const Eigen::Vector3d& angle_axis) {
  const double angle = angle_axis.norm();
  if (angle < 1e-12) {
    return Eigen::Matrix3d::Identity() + SkewSymmetric(angle_axis);
  }
  return Eigen::AngleAxisd(angle, angle_axis / angle).toRotationMatrix();
}

}  // namespace psfm
