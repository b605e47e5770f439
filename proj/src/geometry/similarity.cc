#include "psfm/geometry/similarity.h"

#include <Eigen/SVD>

namespace psfm {

SimilarityTransform SimilarityTransform::Inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

SimilarityTransform SimilarityTransform::Compose(
    const SimilarityTransform& other) const {
  SimilarityTransform out;
  out.scale = scale * other.scale;
  out.rotation = rotation * other.rotation;
  out.translation = scale * (rotation * other.translation) + translation;
  return out;
}

CameraPose SimilarityTransform::ApplyToPose(const CameraPose& pose) const {
  // x_cam = R (x - ...) is scale invariant under projection, so the camera
  // frame is rescaled along with the world.
  CameraPose out;
  out.rotation = pose.rotation * rotation.transpose();
  out.translation = scale * pose.translation - out.rotation * translation;
  return out;
}

Eigen::Matrix4d SimilarityTransform::Matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = scale * rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Expected<SimilarityEstimate> EstimateSimilarityUmeyama(
    std::span<const Point3> src, std::span<const Point3> dst) {
  if (src.size() != dst.size()) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "source and target sizes differ");
  }
  if (src.size() < 3) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "similarity needs at least three point pairs");
  }
  const double n = static_cast<double>(src.size());

  Eigen::Vector3d mean_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mean_src += src[i];
    mean_dst += dst[i];
  }
  mean_src /= n;
  mean_dst /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d src_scatter = Eigen::Matrix3d::Zero();
  double src_var = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d s = src[i] - mean_src;
    const Eigen::Vector3d d = dst[i] - mean_dst;
    cov += d * s.transpose();
    src_scatter += s * s.transpose();
    src_var += s.squaredNorm();
  }
  cov /= n;
  src_var /= n;

  // Collinear sources leave rotation about the line unconstrained.
  Eigen::JacobiSVD<Eigen::Matrix3d> scatter_svd(src_scatter);
  const Eigen::Vector3d sv = scatter_svd.singularValues();
  if (!(sv(0) > 0) || sv(1) <= 1e-12 * sv(0)) {
    return MakeError(ErrorCode::kDegenerate, "source points are collinear");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU |
                                                 Eigen::ComputeFullV);
  Eigen::Vector3d sign_correction = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0) {
    sign_correction(2) = -1;
  }

  SimilarityEstimate estimate;
  SimilarityTransform& t = estimate.transform;
  t.rotation = svd.matrixU() * sign_correction.asDiagonal() *
               svd.matrixV().transpose();
  t.scale = svd.singularValues().dot(sign_correction) / src_var;
  if (!(t.scale > 0)) {
    return MakeError(ErrorCode::kDegenerate, "target points coincide");
  }
  t.translation = mean_dst - t.scale * (t.rotation * mean_src);
  estimate.mse = SimilarityMse(t, src, dst);
  return estimate;
}

double SimilarityMse(const SimilarityTransform& transform,
                     std::span<const Point3> src,
                     std::span<const Point3> dst) {
  if (src.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    sum += (dst[i] - transform.Apply(src[i])).squaredNorm();
  }
  return sum / static_cast<double>(src.size());
}

}  // namespace psfm
