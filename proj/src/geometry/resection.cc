#include "psfm/geometry/resection.h"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "psfm/geometry/bundle_adjustment.h"
#include "psfm/util/random.h"

namespace psfm {
namespace {

// Smallest over largest eigenvalue of the point scatter; ~0 for coplanar sets.
double Planarity(std::span<const Point3> points) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : points) scatter += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev(2) > 0)) return 0.0;
  return std::max(ev(0), 0.0) / ev(2);
}

std::size_t CountInliers(const CameraPose& pose, std::span<const Point3> points,
                         std::span<const Eigen::Vector2d> pixels,
                         const CameraIntrinsics& intr, double max_sq,
                         std::vector<char>* mask) {
  mask->assign(points.size(), 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto err = SquaredReprojectionError(intr, pose, points[i], pixels[i]);
    if (err && *err <= max_sq) {
      (*mask)[i] = 1;
      ++count;
    }
  }
  return count;
}

}  // namespace

Expected<CameraPose> EstimatePoseDlt(std::span<const Point3> points,
                                     std::span<const Eigen::Vector2d> pixels,
                                     const CameraIntrinsics& intr) {
  const std::size_t n = points.size();
  if (n < 6 || pixels.size() != n) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "DLT resection needs at least six correspondences");
  }
  if (Planarity(points) < 1e-10) {
    return MakeError(ErrorCode::kDegenerate, "coplanar 3D points");
  }

  // Condition the 3D points: centroid at origin, mean distance sqrt(3).
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(n);
  double mean_dist = 0.0;
  for (const auto& p : points) mean_dist += (p - mean).norm();
  mean_dist /= static_cast<double>(n);
  const double s = mean_dist > 0 ? std::sqrt(3.0) / mean_dist : 1.0;
  Eigen::Matrix4d t3 = Eigen::Matrix4d::Identity();
  t3.topLeftCorner<3, 3>() *= s;
  t3.topRightCorner<3, 1>() = -s * mean;

  Eigen::MatrixXd a(std::max<std::size_t>(2 * n, 12), 12);
  a.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector4d x = t3 * points[i].homogeneous();
    const Eigen::Vector2d u = intr.ImageToNormalized(pixels[i]);
    a.block<1, 4>(2 * i, 0) = -x.transpose();
    a.block<1, 4>(2 * i, 8) = u.x() * x.transpose();
    a.block<1, 4>(2 * i + 1, 4) = -x.transpose();
    a.block<1, 4>(2 * i + 1, 8) = u.y() * x.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv(10) <= 1e-9 * sv(0)) {
    return MakeError(ErrorCode::kDegenerate, "DLT system rank deficient");
  }
  const Eigen::VectorXd p = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> proj;
  proj << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8), p(9), p(10),
      p(11);
  proj = proj * t3;

  Eigen::Matrix3d m = proj.leftCols<3>();
  if (m.determinant() < 0) {
    proj *= -1;
    m *= -1;
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> msvd(m, Eigen::ComputeFullU |
                                                Eigen::ComputeFullV);
  const double scale = msvd.singularValues().mean();
  if (!(scale > 0)) {
    return MakeError(ErrorCode::kDegenerate, "DLT camera matrix is singular");
  }
  CameraPose pose;
  pose.rotation = msvd.matrixU() * msvd.matrixV().transpose();
  pose.translation = proj.col(3) / scale;
  if (!pose.rotation.allFinite() || !pose.translation.allFinite()) {
    return MakeError(ErrorCode::kDegenerate, "non-finite DLT pose");
  }
  return pose;
}

std::vector<CameraPose> EstimatePoseP3P(std::span<const Point3> points,
                                        std::span<const Eigen::Vector2d> pixels,
                                        const CameraIntrinsics& intr) {
  std::vector<CameraPose> poses;
  if (points.size() < 3 || pixels.size() < 3) return poses;
  const Point3& p1 = points[0];
  const Point3& p2 = points[1];
  const Point3& p3 = points[2];
  if ((p2 - p1).cross(p3 - p1).norm() < 1e-12 * (p2 - p1).squaredNorm()) return poses;
  Eigen::Vector3d f[3];
  for (int i = 0; i < 3; ++i) {
    f[i] = intr.ImageToNormalized(pixels[i]).homogeneous().normalized();
  }
  // Side lengths opposite each point and cosines of the viewing angles.
  const double a2 = (p2 - p3).squaredNorm();
  const double b2 = (p1 - p3).squaredNorm();
  const double c2 = (p1 - p2).squaredNorm();
  const double ca = f[1].dot(f[2]);
  const double cb = f[0].dot(f[2]);
  const double cg = f[0].dot(f[1]);

  // Distances s2 = u s1, s3 = v s1; quartic in v.
  const double amc = (a2 - c2) / b2;
  const double apc = (a2 + c2) / b2;
  const double bmc = (b2 - c2) / b2;
  const double bma = (b2 - a2) / b2;
  const double coeff[5] = {
      (1 + amc) * (1 + amc) - 4 * a2 / b2 * cg * cg,
      4 * (-amc * (1 + amc) * cb + 2 * a2 / b2 * cg * cg * cb - (1 - apc) * ca * cg),
      2 * (amc * amc - 1 + 2 * amc * amc * cb * cb + 2 * bmc * ca * ca -
           4 * apc * ca * cb * cg + 2 * bma * cg * cg),
      4 * (amc * (1 - amc) * cb - (1 - apc) * ca * cg + 2 * c2 / b2 * ca * ca * cb),
      (amc - 1) * (amc - 1) - 4 * c2 / b2 * ca * ca};
  if (std::abs(coeff[4]) < 1e-14) return poses;
  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  companion.block<3, 3>(1, 0).setIdentity();
  for (int i = 0; i < 4; ++i) companion(i, 3) = -coeff[i] / coeff[4];
  const Eigen::Vector4cd roots = companion.eigenvalues();

  Eigen::Matrix3d world;
  world << p1, p2, p3;
  for (int r = 0; r < 4; ++r) {
    if (std::abs(roots(r).imag()) > 1e-6 * std::max(1.0, std::abs(roots(r).real()))) {
      continue;
    }
    double v = roots(r).real();
    // Newton steps polish the eigenvalue root.
    for (int k = 0; k < 4; ++k) {
      const double pv =
          (((coeff[4] * v + coeff[3]) * v + coeff[2]) * v + coeff[1]) * v + coeff[0];
      const double dv =
          ((4 * coeff[4] * v + 3 * coeff[3]) * v + 2 * coeff[2]) * v + coeff[1];
      if (std::abs(dv) < 1e-14) break;
      v -= pv / dv;
    }
    if (v <= 0) continue;
    const double denom = 2 * (cg - v * ca);
    if (std::abs(denom) < 1e-14) continue;
    const double u = ((amc - 1) * v * v - 2 * amc * cb * v + 1 + amc) / denom;
    if (u <= 0) continue;
    const double s1_sq = b2 / (1 + v * v - 2 * v * cb);
    if (!(s1_sq > 0)) continue;
    const double s1 = std::sqrt(s1_sq);
    // Newton on the three law-of-cosines equations refines the depths.
    Eigen::Vector3d s(s1, u * s1, v * s1);
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d r(s(1) * s(1) + s(2) * s(2) - 2 * s(1) * s(2) * ca - a2,
                              s(0) * s(0) + s(2) * s(2) - 2 * s(0) * s(2) * cb - b2,
                              s(0) * s(0) + s(1) * s(1) - 2 * s(0) * s(1) * cg - c2);
      Eigen::Matrix3d jac;
      jac << 0, 2 * (s(1) - s(2) * ca), 2 * (s(2) - s(1) * ca),
          2 * (s(0) - s(2) * cb), 0, 2 * (s(2) - s(0) * cb),
          2 * (s(0) - s(1) * cg), 2 * (s(1) - s(0) * cg), 0;
      const Eigen::Vector3d step = jac.fullPivLu().solve(r);
      if (!step.allFinite()) break;
      s -= step;
    }
    Eigen::Matrix3d cam;
    cam << s(0) * f[0], s(1) * f[1], s(2) * f[2];
    // Rigid alignment world -> camera.
    const Eigen::Vector3d mw = world.rowwise().mean();
    const Eigen::Vector3d mc = cam.rowwise().mean();
    const Eigen::Matrix3d cov =
        (cam.colwise() - mc) * (world.colwise() - mw).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
    CameraPose pose;
    pose.rotation = svd.matrixU() * d * svd.matrixV().transpose();
    pose.translation = mc - pose.rotation * mw;
    if (pose.rotation.allFinite() && pose.translation.allFinite()) poses.push_back(pose);
  }
  return poses;
}

CameraPose RefinePose(const CameraPose& initial,
                      std::span<const Point3> points,
                      std::span<const Eigen::Vector2d> pixels,
                      const CameraIntrinsics& intr, int max_iterations) {
  auto cost_of = [&](const CameraPose& pose) {
    double cost = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto err = SquaredReprojectionError(intr, pose, points[i], pixels[i]);
      if (!err) return std::numeric_limits<double>::infinity();
      cost += *err;
    }
    return cost;
  };

  CameraPose pose = initial;
  double cost = cost_of(pose);
  double lambda = 1e-3;
  Eigen::Vector2d r;
  Eigen::Matrix<double, 2, 6> j;
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!ComputeReprojectionJacobian(intr, pose, points[i], pixels[i], &r,
                                       &j, nullptr)) {
        continue;
      }
      h.noalias() += j.transpose() * j;
      g.noalias() += j.transpose() * r;
    }
    if (g.cwiseAbs().maxCoeff() < 1e-12) break;
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::Matrix<double, 6, 6> damped = h;
      damped.diagonal() += lambda * h.diagonal().cwiseMax(1e-9);
      const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-g);
      const CameraPose candidate = UpdatePose(pose, delta);
      const double new_cost = cost_of(candidate);
      if (new_cost < cost) {
        const double decrease = cost - new_cost;
        pose = candidate;
        cost = new_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = decrease > 1e-14 * (cost + decrease);
        break;
      }
      lambda *= 10;
    }
    if (!improved) break;
  }
  return pose;
}

Expected<ResectionResult> ResectCamera(std::span<const Point3> points,
                                       std::span<const Eigen::Vector2d> pixels,
                                       const CameraIntrinsics& intr,
                                       const ResectionOptions& options) {
  const std::size_t n = points.size();
  if (pixels.size() != n) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "correspondence list size mismatch");
  }
  if (n < 6) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "resection needs at least six correspondences");
  }
  const double max_sq = options.max_error_px * options.max_error_px;
  Rng rng(options.seed);
  std::vector<char> best_mask, mask;
  std::size_t best_count = 0;
  CameraPose best_pose;
  std::size_t required = options.max_iterations;
  std::vector<Point3> sp(3);
  std::vector<Eigen::Vector2d> sx(3);
  for (std::size_t iter = 0; iter < required; ++iter) {
    const auto sample = SampleDistinct(n, 3, rng);
    for (std::size_t k = 0; k < 3; ++k) {
      sp[k] = points[sample[k]];
      sx[k] = pixels[sample[k]];
    }
    for (const CameraPose& pose : EstimatePoseP3P(sp, sx, intr)) {
      const std::size_t count =
          CountInliers(pose, points, pixels, intr, max_sq, &mask);
      if (count > best_count) {
        best_count = count;
        best_mask = mask;
        best_pose = pose;
        required = RequiredRansacIterations(
            static_cast<double>(count) / static_cast<double>(n), 3,
            options.confidence, options.max_iterations);
      }
    }
  }
  if (best_count < 6) {
    return MakeError(ErrorCode::kNoConsensus,
                     "no pose with six reprojection inliers");
  }

  for (int round = 0; round < 3; ++round) {
    std::vector<Point3> in_points;
    std::vector<Eigen::Vector2d> in_pixels;
    for (std::size_t i = 0; i < n; ++i) {
      if (best_mask[i]) {
        in_points.push_back(points[i]);
        in_pixels.push_back(pixels[i]);
      }
    }
    best_pose = RefinePose(best_pose, in_points, in_pixels, intr,
                           options.refine_iterations);
    const std::size_t count =
        CountInliers(best_pose, points, pixels, intr, max_sq, &mask);
    const bool stable = mask == best_mask;
    best_mask = mask;
    best_count = count;
    if (stable) break;
  }
  if (best_count < 6) {
    return MakeError(ErrorCode::kNoConsensus, "refinement lost the inliers");
  }

  ResectionResult result;
  result.pose = best_pose;
  result.inlier_mask = std::move(best_mask);
  result.num_inliers = best_count;
  return result;
}

}  // namespace psfm
