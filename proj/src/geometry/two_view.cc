#include "psfm/geometry/two_view.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "psfm/util/random.h"

namespace psfm {
namespace {

// Similarity that moves the centroid to the origin and sets the mean distance
// to sqrt(2).
Eigen::Matrix3d HartleyNormalization(std::span<const Eigen::Vector2d> points) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  double mean_dist = 0.0;
  for (const auto& p : points) mean_dist += (p - mean).norm();
  mean_dist /= static_cast<double>(points.size());
  const double s = mean_dist > 0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

Eigen::Matrix3d FundamentalFromEssential(const Eigen::Matrix3d& essential,
                                         const CameraIntrinsics& intr1,
                                         const CameraIntrinsics& intr2) {
  return intr2.K().inverse().transpose() * essential * intr1.K().inverse();
}

// Depth of the two-view triangulation in both cameras (camera 1 at origin).
bool PositiveDepth(const CameraPose& pose, const Eigen::Vector2d& n1,
                   const Eigen::Vector2d& n2) {
  Eigen::Matrix4d a;
  a.row(0) << -1, 0, n1.x(), 0;
  a.row(1) << 0, -1, n1.y(), 0;
  Eigen::Matrix<double, 3, 4> proj;
  proj.leftCols<3>() = pose.rotation;
  proj.col(3) = pose.translation;
  a.row(2) = n2.x() * proj.row(2) - proj.row(0);
  a.row(3) = n2.y() * proj.row(2) - proj.row(1);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d h = svd.matrixV().col(3);
  if (std::abs(h(3)) < 1e-14) return false;
  const Eigen::Vector3d x = h.head<3>() / h(3);
  return x.z() > 0 && pose.Transform(x).z() > 0;
}


// Polynomials of degree <= 3 in (x, y, z). The ten cubic monomials come
// first, then the quotient basis x2 xy xz y2 yz z2 x y z 1.
using Poly = std::array<double, 20>;

struct Monomials {
  std::array<std::array<int, 3>, 20> exponent;
  int index[4][4][4];
  Monomials() {
    const int order[20][3] = {{3, 0, 0}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {1, 1, 1},
                              {1, 0, 2}, {0, 3, 0}, {0, 2, 1}, {0, 1, 2}, {0, 0, 3},
                              {2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1},
                              {0, 0, 2}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 0}};
    for (int i = 0; i < 20; ++i) {
      exponent[i] = {order[i][0], order[i][1], order[i][2]};
      index[order[i][0]][order[i][1]][order[i][2]] = i;
    }
  }
};

const Monomials& Monos() {
  static const Monomials m;
  return m;
}

Poly Mul(const Poly& a, const Poly& b) {
  const auto& m = Monos();
  Poly out{};
  for (int i = 0; i < 20; ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; j < 20; ++j) {
      if (b[j] == 0) continue;
      const int ex = m.exponent[i][0] + m.exponent[j][0];
      const int ey = m.exponent[i][1] + m.exponent[j][1];
      const int ez = m.exponent[i][2] + m.exponent[j][2];
      if (ex + ey + ez > 3) continue;  // never reached for the products used
      out[m.index[ex][ey][ez]] += a[i] * b[j];
    }
  }
  return out;
}

Poly Add(const Poly& a, const Poly& b, double sb = 1.0) {
  Poly out;
  for (int i = 0; i < 20; ++i) out[i] = a[i] + sb * b[i];
  return out;
}

double SampsonResidual(const Eigen::Matrix3d& f, const Eigen::Vector2d& x1,
                       const Eigen::Vector2d& x2) {
  const Eigen::Vector3d h1 = x1.homogeneous();
  const Eigen::Vector3d h2 = x2.homogeneous();
  const Eigen::Vector3d fx1 = f * h1;
  const Eigen::Vector3d ftx2 = f.transpose() * h2;
  const double denom = fx1.head<2>().squaredNorm() + ftx2.head<2>().squaredNorm();
  return denom > 0 ? h2.dot(fx1) / std::sqrt(denom) : 0.0;
}

// Levenberg-Marquardt on the Sampson residuals of a relative pose with unit
// translation (rotation increment plus two tangent directions of t).
CameraPose RefineRelativePose(const CameraPose& initial,
                              std::span<const Eigen::Vector2d> x1,
                              std::span<const Eigen::Vector2d> x2,
                              const CameraIntrinsics& intr1,
                              const CameraIntrinsics& intr2) {
  const Eigen::Matrix3d k1_inv = intr1.K().inverse();
  const Eigen::Matrix3d k2_inv_t = intr2.K().inverse().transpose();
  const std::size_t n = x1.size();
  auto apply = [](const CameraPose& pose, const Eigen::Matrix<double, 5, 1>& d) {
    Eigen::Vector3d t = pose.translation.normalized();
    Eigen::Vector3d b1 = t.unitOrthogonal();
    Eigen::Vector3d b2 = t.cross(b1);
    CameraPose out;
    const Eigen::Vector3d w = d.head<3>();
    out.rotation = (w.norm() > 0 ? Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix()
                                 : Eigen::Matrix3d::Identity()) *
                   pose.rotation;
    out.translation = (t + d(3) * b1 + d(4) * b2).normalized();
    return out;
  };
  auto residuals = [&](const CameraPose& pose) {
    const Eigen::Matrix3d f =
        k2_inv_t * SkewSymmetric(pose.translation) * pose.rotation * k1_inv;
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) r(i) = SampsonResidual(f, x1[i], x2[i]);
    return r;
  };
  CameraPose pose = initial;
  Eigen::VectorXd r = residuals(pose);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  Eigen::MatrixXd jac(n, 5);
  for (int iter = 0; iter < 20; ++iter) {
    for (int k = 0; k < 5; ++k) {
      Eigen::Matrix<double, 5, 1> d = Eigen::Matrix<double, 5, 1>::Zero();
      d(k) = 1e-7;
      const Eigen::VectorXd rp = residuals(apply(pose, d));
      d(k) = -1e-7;
      jac.col(k) = (rp - residuals(apply(pose, d))) / 2e-7;
    }
    const Eigen::Matrix<double, 5, 5> h = jac.transpose() * jac;
    const Eigen::Matrix<double, 5, 1> g = jac.transpose() * r;
    bool improved = false;
    while (lambda < 1e10) {
      Eigen::Matrix<double, 5, 5> damped = h;
      damped.diagonal() += lambda * h.diagonal().cwiseMax(1e-12);
      const Eigen::Matrix<double, 5, 1> step = damped.ldlt().solve(-g);
      const CameraPose candidate = apply(pose, step);
      const Eigen::VectorXd rc = residuals(candidate);
      const double c = rc.squaredNorm();
      if (c < cost) {
        improved = cost - c > 1e-12 * cost;
        pose = candidate;
        r = rc;
        cost = c;
        lambda = std::max(lambda * 0.1, 1e-12);
        break;
      }
      lambda *= 10;
    }
    if (!improved) break;
  }
  return pose;
}

}  // namespace

std::optional<Eigen::Matrix3d> EstimateEssentialEightPoint(
    std::span<const Eigen::Vector2d> normalized1,
    std::span<const Eigen::Vector2d> normalized2) {
  const std::size_t n = normalized1.size();
  if (n < 8 || normalized2.size() != n) return std::nullopt;
  const Eigen::Matrix3d t1 = HartleyNormalization(normalized1);
  const Eigen::Matrix3d t2 = HartleyNormalization(normalized2);

  Eigen::MatrixXd a(std::max<std::size_t>(n, 9), 9);
  a.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d x1 = t1 * normalized1[i].homogeneous();
    const Eigen::Vector3d x2 = t2 * normalized2[i].homogeneous();
    a.row(i) << x2.x() * x1.x(), x2.x() * x1.y(), x2.x(), x2.y() * x1.x(),
        x2.y() * x1.y(), x2.y(), x1.x(), x1.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  // A second null direction means the epipolar geometry is not determined.
  if (sv(7) <= 1e-9 * sv(0)) return std::nullopt;

  const Eigen::VectorXd e = svd.matrixV().col(8);
  Eigen::Matrix3d e_norm;
  e_norm << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
  Eigen::Matrix3d essential = t2.transpose() * e_norm * t1;

  Eigen::JacobiSVD<Eigen::Matrix3d> esvd(essential, Eigen::ComputeFullU |
                                                        Eigen::ComputeFullV);
  essential = esvd.matrixU() * Eigen::Vector3d(1, 1, 0).asDiagonal() *
              esvd.matrixV().transpose();
  return essential;
}

double SampsonErrorSquared(const Eigen::Matrix3d& fundamental,
                           const Eigen::Vector2d& x1,
                           const Eigen::Vector2d& x2) {
  const Eigen::Vector3d h1 = x1.homogeneous();
  const Eigen::Vector3d h2 = x2.homogeneous();
  const Eigen::Vector3d fx1 = fundamental * h1;
  const Eigen::Vector3d ftx2 = fundamental.transpose() * h2;
  const double num = h2.dot(fx1);
  const double denom = fx1.x() * fx1.x() + fx1.y() * fx1.y() +
                       ftx2.x() * ftx2.x() + ftx2.y() * ftx2.y();
  if (denom <= 0) return std::numeric_limits<double>::infinity();
  return num * num / denom;
}

std::vector<CameraPose> DecomposeEssential(const Eigen::Matrix3d& essential) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(essential, Eigen::ComputeFullU |
                                                       Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0) u *= -1;
  if (v.determinant() < 0) v *= -1;
  Eigen::Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Eigen::Matrix3d r1 = u * w * v.transpose();
  const Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2).normalized();
  std::vector<CameraPose> poses(4);
  poses[0] = {r1, t};
  poses[1] = {r1, -t};
  poses[2] = {r2, t};
  poses[3] = {r2, -t};
  return poses;
}

std::vector<Eigen::Matrix3d> EstimateEssentialFivePoint(
    std::span<const Eigen::Vector2d> normalized1,
    std::span<const Eigen::Vector2d> normalized2) {
  std::vector<Eigen::Matrix3d> out;
  if (normalized1.size() != 5 || normalized2.size() != 5) return out;
  Eigen::Matrix<double, 9, 9> q = Eigen::Matrix<double, 9, 9>::Zero();
  for (int i = 0; i < 5; ++i) {
    const Eigen::Vector2d& a = normalized1[i];
    const Eigen::Vector2d& b = normalized2[i];
    q.row(i) << b.x() * a.x(), b.x() * a.y(), b.x(), b.y() * a.x(), b.y() * a.y(),
        b.y(), a.x(), a.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 9, 9>> svd(q, Eigen::ComputeFullV);
  if (svd.singularValues()(4) <= 1e-12 * svd.singularValues()(0)) return out;
  // E = x X + y Y + z Z + W over the null space.
  const auto& m = Monos();
  std::array<Poly, 9> e;
  for (int k = 0; k < 9; ++k) {
    e[k].fill(0.0);
    e[k][m.index[1][0][0]] = svd.matrixV()(k, 5);
    e[k][m.index[0][1][0]] = svd.matrixV()(k, 6);
    e[k][m.index[0][0][1]] = svd.matrixV()(k, 7);
    e[k][m.index[0][0][0]] = svd.matrixV()(k, 8);
  }
  auto at = [&](int r, int c) -> const Poly& { return e[3 * r + c]; };

  Eigen::Matrix<double, 10, 20> a;
  // det(E) = 0.
  Poly det = Mul(at(0, 0), Add(Mul(at(1, 1), at(2, 2)), Mul(at(1, 2), at(2, 1)), -1));
  det = Add(det, Mul(at(0, 1), Add(Mul(at(1, 2), at(2, 0)), Mul(at(1, 0), at(2, 2)), -1)));
  det = Add(det, Mul(at(0, 2), Add(Mul(at(1, 0), at(2, 1)), Mul(at(1, 1), at(2, 0)), -1)));
  for (int j = 0; j < 20; ++j) a(0, j) = det[j];
  // 2 E E^T E - trace(E E^T) E = 0.
  Poly eet[3][3];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      eet[r][c].fill(0.0);
      for (int k = 0; k < 3; ++k) eet[r][c] = Add(eet[r][c], Mul(at(r, k), at(c, k)));
    }
  }
  const Poly trace = Add(Add(eet[0][0], eet[1][1]), eet[2][2]);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      Poly p{};
      for (int k = 0; k < 3; ++k) p = Add(p, Mul(eet[r][k], at(k, c)), 2.0);
      p = Add(p, Mul(trace, at(r, c)), -1.0);
      for (int j = 0; j < 20; ++j) a(1 + 3 * r + c, j) = p[j];
    }
  }

  // Cubic monomials in terms of the quotient basis, then the action matrix
  // of multiplication by x.
  const Eigen::Matrix<double, 10, 10> cubic = a.leftCols<10>();
  const Eigen::FullPivLU<Eigen::Matrix<double, 10, 10>> lu(cubic);
  if (!lu.isInvertible()) return out;
  const Eigen::Matrix<double, 10, 10> reduced = -lu.solve(a.rightCols<10>());
  Eigen::Matrix<double, 10, 10> action = Eigen::Matrix<double, 10, 10>::Zero();
  action.topRows<6>() = reduced.topRows<6>();
  action(6, 0) = 1;  // x * x  = x2
  action(7, 1) = 1;  // x * y  = xy
  action(8, 2) = 1;  // x * z  = xz
  action(9, 6) = 1;  // x * 1  = x
  const Eigen::EigenSolver<Eigen::Matrix<double, 10, 10>> eig(action);
  for (int i = 0; i < 10; ++i) {
    const std::complex<double> lambda = eig.eigenvalues()(i);
    if (std::abs(lambda.imag()) > 1e-8 * std::max(1.0, std::abs(lambda.real()))) continue;
    const Eigen::Matrix<std::complex<double>, 10, 1> v = eig.eigenvectors().col(i);
    if (std::abs(v(9)) < 1e-14) continue;
    const double x = (v(6) / v(9)).real();
    const double y = (v(7) / v(9)).real();
    const double z = (v(8) / v(9)).real();
    Eigen::Matrix<double, 9, 1> ev = x * svd.matrixV().col(5) + y * svd.matrixV().col(6) +
                                     z * svd.matrixV().col(7) + svd.matrixV().col(8);
    Eigen::Matrix3d essential;
    essential << ev(0), ev(1), ev(2), ev(3), ev(4), ev(5), ev(6), ev(7), ev(8);
    if (!essential.allFinite()) continue;
    out.push_back(essential / essential.norm());
  }
  return out;
}

Expected<RelativePoseResult> EstimateRelativePose(
    std::span<const Eigen::Vector2d> pixels1,
    std::span<const Eigen::Vector2d> pixels2,
    const CameraIntrinsics& intr1, const CameraIntrinsics& intr2,
    const RelativePoseOptions& options) {
  const std::size_t n = pixels1.size();
  if (pixels2.size() != n) {
    return MakeError(ErrorCode::kInvalidArgument, "match list size mismatch");
  }
  if (n < 8) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "relative pose needs at least eight matches");
  }

  std::vector<Eigen::Vector2d> norm1(n), norm2(n);
  for (std::size_t i = 0; i < n; ++i) {
    norm1[i] = intr1.ImageToNormalized(pixels1[i]);
    norm2[i] = intr2.ImageToNormalized(pixels2[i]);
  }
  const double max_sq = options.max_error_px * options.max_error_px;
  const Eigen::Matrix3d k1_inv = intr1.K().inverse();
  const Eigen::Matrix3d k2_inv_t = intr2.K().inverse().transpose();

  // Truncated squared Sampson cost (MSAC). Near-planar scenes admit a second
  // essential matrix that keeps every match under the threshold; only the
  // residual size separates it from the true one.
  auto score = [&](const Eigen::Matrix3d& essential, std::vector<char>* mask,
                   double* cost) {
    const Eigen::Matrix3d f = k2_inv_t * essential * k1_inv;
    std::size_t count = 0;
    double total = 0;
    mask->assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double err = SampsonErrorSquared(f, pixels1[i], pixels2[i]);
      if (err <= max_sq) {
        (*mask)[i] = 1;
        ++count;
        total += err;
      } else {
        total += max_sq;
      }
    }
    if (cost) *cost = total;
    return count;
  };

  Rng rng(options.seed);
  std::vector<char> best_mask, mask;
  std::size_t best_count = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::Matrix3d essential;
  std::size_t required = options.max_iterations;
  std::vector<Eigen::Vector2d> s1(5), s2(5);
  for (std::size_t iter = 0; iter < required; ++iter) {
    const auto sample = SampleDistinct(n, 5, rng);
    for (std::size_t k = 0; k < 5; ++k) {
      s1[k] = norm1[sample[k]];
      s2[k] = norm2[sample[k]];
    }
    for (const auto& candidate : EstimateEssentialFivePoint(s1, s2)) {
      double cost = 0;
      const std::size_t count = score(candidate, &mask, &cost);
      if (cost < best_cost) {
        best_cost = cost;
        best_count = count;
        best_mask = mask;
        essential = candidate;
        required = std::max(options.min_iterations,
                            RequiredRansacIterations(
                                static_cast<double>(count) / static_cast<double>(n), 5,
                                options.confidence, options.max_iterations));
      }
    }
  }
  if (best_count < 8) {
    return MakeError(ErrorCode::kNoConsensus,
                     "no essential matrix with eight inliers");
  }

  auto inliers_of = [&](const std::vector<char>& m, std::vector<Eigen::Vector2d>* a,
                        std::vector<Eigen::Vector2d>* b,
                        std::span<const Eigen::Vector2d> from_a,
                        std::span<const Eigen::Vector2d> from_b) {
    a->clear();
    b->clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (m[i]) {
        a->push_back(from_a[i]);
        b->push_back(from_b[i]);
      }
    }
  };

  // Points on a single line per image leave a family of epipolar geometries.
  {
    std::vector<Eigen::Vector2d> in1, in2;
    inliers_of(best_mask, &in1, &in2, norm1, norm2);
    const Eigen::Matrix3d t1 = HartleyNormalization(in1);
    const Eigen::Matrix3d t2 = HartleyNormalization(in2);
    Eigen::MatrixXd design(in1.size(), 9);
    for (std::size_t i = 0; i < in1.size(); ++i) {
      const Eigen::Vector3d a = t1 * in1[i].homogeneous();
      const Eigen::Vector3d b = t2 * in2[i].homogeneous();
      design.row(i) << b.x() * a.x(), b.x() * a.y(), b.x(), b.y() * a.x(), b.y() * a.y(),
          b.y(), a.x(), a.y(), 1.0;
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(design).singularValues();
    if (sv(5) <= 1e-9 * sv(0)) {
      return MakeError(ErrorCode::kDegenerate,
                       "inlier set does not determine the epipolar geometry");
    }
  }

  auto pick_factorization = [&](const Eigen::Matrix3d& e, const std::vector<char>& m,
                                std::size_t* positive_out) {
    const auto candidates = DecomposeEssential(e);
    std::size_t best_positive = 0;
    int best_candidate = -1;
    for (int c = 0; c < 4; ++c) {
      std::size_t positive = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (m[i] && PositiveDepth(candidates[c], norm1[i], norm2[i])) ++positive;
      }
      if (positive > best_positive) {
        best_positive = positive;
        best_candidate = c;
      }
    }
    *positive_out = best_positive;
    return best_candidate < 0 ? std::optional<CameraPose>()
                              : std::optional<CameraPose>(candidates[best_candidate]);
  };

  std::size_t positive = 0;
  auto pose = pick_factorization(essential, best_mask, &positive);
  if (!pose) {
    return MakeError(ErrorCode::kCheirality, "no decomposition with positive depth");
  }
  // Refinement on the consensus set, repeated while the set changes.
  for (int round = 0; round < 3; ++round) {
    std::vector<Eigen::Vector2d> in1, in2;
    inliers_of(best_mask, &in1, &in2, pixels1, pixels2);
    const CameraPose refined = RefineRelativePose(*pose, in1, in2, intr1, intr2);
    const Eigen::Matrix3d e = SkewSymmetric(refined.translation) * refined.rotation;
    double cost = 0;
    const std::size_t count = score(e, &mask, &cost);
    if (count < best_count || cost > best_cost) break;
    best_cost = cost;
    const bool converged = mask == best_mask;
    pose = refined;
    essential = e;
    best_count = count;
    best_mask = mask;
    if (converged) break;
  }

  positive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask[i] && PositiveDepth(*pose, norm1[i], norm2[i])) ++positive;
  }
  if (static_cast<double>(positive) <=
      options.min_cheirality_ratio * static_cast<double>(best_count)) {
    return MakeError(ErrorCode::kCheirality,
                     "no decomposition with majority positive depth");
  }

  RelativePoseResult result;
  result.pose = *pose;
  result.essential = essential;
  result.inlier_mask = std::move(best_mask);
  result.num_inliers = best_count;
  return result;
}

}  // namespace psfm
