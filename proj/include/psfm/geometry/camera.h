#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace psfm {

using image_t = std::uint32_t;
using point3D_t = std::uint64_t;

// 3D scene point in world (or reconstruction) coordinates.
using Point3 = Eigen::Vector3d;

// Calibrated pinhole intrinsics. Never refined by any optimizer.
struct CameraIntrinsics {
  double focal_x = 1.0;
  double focal_y = 1.0;
  double principal_x = 0.0;
  double principal_y = 0.0;
  int image_width = 0;
  int image_height = 0;

  static CameraIntrinsics Pinhole(double focal, double principal_x,
                                  double principal_y, int width, int height);

  bool IsValid() const;
  Eigen::Matrix3d K() const;
  Eigen::Vector2d ImageToNormalized(const Eigen::Vector2d& pixel) const;
  Eigen::Vector2d NormalizedToImage(const Eigen::Vector2d& normalized) const;
  double MeanFocal() const { return 0.5 * (focal_x + focal_y); }

  bool operator==(const CameraIntrinsics&) const = default;
};

// World-to-camera rigid transform: x_cam = rotation * x_world + translation.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static CameraPose FromQuaternion(const Eigen::Quaterniond& q,
                                   const Eigen::Vector3d& t);
  // Pose of a camera at `center` whose rotation is `rotation`.
  static CameraPose FromCenter(const Eigen::Matrix3d& rotation,
                               const Eigen::Vector3d& center);

  Eigen::Vector3d Center() const;
  Eigen::Vector3d ViewingDirection() const;
  Eigen::Vector3d Transform(const Point3& world) const;
  CameraPose Inverse() const;
  // Canonical quaternion with non-negative real part.
  Eigen::Quaterniond Quaternion() const;
};

// Pinhole projection. Returns nullopt when the point has non-positive depth.
std::optional<Eigen::Vector2d> ProjectPoint(const CameraIntrinsics& intr,
                                            const CameraPose& pose,
                                            const Point3& point);

// Projects and returns the squared pixel distance to `observed`, or nullopt
// when the point is behind the camera.
std::optional<double> SquaredReprojectionError(const CameraIntrinsics& intr,
                                               const CameraPose& pose,
                                               const Point3& point,
                                               const Eigen::Vector2d& observed);

// Relative pose of camera 2 with respect to camera 1.
CameraPose RelativePose(const CameraPose& pose1, const CameraPose& pose2);

// Angle between two rotations in radians.
double RotationAngularDistance(const Eigen::Matrix3d& a,
                               const Eigen::Matrix3d& b);

// Angle in radians between two vectors; 0 for zero-length inputs.
double AngleBetween(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

// Largest deviation of R^T R from identity and |det(R) - 1|.
double RotationOrthonormalityError(const Eigen::Matrix3d& rotation);

// Projects an arbitrary 3x3 matrix onto SO(3) in the Frobenius sense.
Eigen::Matrix3d NearestRotation(const Eigen::Matrix3d& m);

Eigen::Matrix3d SkewSymmetric(const Eigen::Vector3d& v);

// Rotation exp map of an angle-axis vector.
Eigen::Matrix3d AngleAxisToRotation(const Eigen::Vector3d& angle_axis);

}  // namespace psfm
