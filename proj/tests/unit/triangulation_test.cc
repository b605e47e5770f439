#include "psfm/geometry/triangulation.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "synthetic_scene.h"

namespace psfm {
namespace {

std::vector<TriangulationObservation> TwoCameraSetup(const Point3& x,
                                                     double noise, Rng& rng) {
  const auto intr = testing::DefaultIntrinsics();
  std::vector<TriangulationObservation> obs;
  for (double cx : {-1.0, 1.0}) {
    const CameraPose pose = testing::LookAt(Eigen::Vector3d(cx, 0, 0),
                                            Eigen::Vector3d(0, 0, 5),
                                            -Eigen::Vector3d::UnitY());
    const auto xy = ProjectPoint(intr, pose, x);
    obs.push_back({intr, pose, *xy + testing::GaussianNoise2(rng, noise)});
  }
  return obs;
}

TEST(TriangulatePoint, NoiselessTwoViewIsExact) {
  Rng rng(1);
  const Point3 x(0, 0, 5);
  const auto obs = TwoCameraSetup(x, 0.0, rng);
  const auto result = TriangulatePoint(obs);
  ASSERT_TRUE(result.ok()) << result.error().message;
  EXPECT_LT((*result - x).norm(), 1e-9);
}

TEST(TriangulatePoint, IdenticalPosesAreDegenerate) {
  const auto intr = testing::DefaultIntrinsics();
  const CameraPose pose = testing::LookAt(Eigen::Vector3d(0, 0, 0),
                                          Eigen::Vector3d(0, 0, 5),
                                          -Eigen::Vector3d::UnitY());
  const Point3 x(0.2, 0.1, 5);
  const auto xy = *ProjectPoint(intr, pose, x);
  std::vector<TriangulationObservation> obs = {{intr, pose, xy},
                                               {intr, pose, xy}};
  const auto result = TriangulatePoint(obs);
  ASSERT_FALSE(result.ok());
  EXPECT_EQ(result.error().code, ErrorCode::kDegenerate);
}

TEST(TriangulatePoint, SingleObservationIsRejected) {
  Rng rng(1);
  auto obs = TwoCameraSetup(Point3(0, 0, 5), 0.0, rng);
  obs.pop_back();
  EXPECT_EQ(TriangulatePoint(obs).error().code, ErrorCode::kInvalidArgument);
}

TEST(TriangulatePoint, PointBehindCamerasFailsCheirality) {
  const auto intr = testing::DefaultIntrinsics();
  std::vector<TriangulationObservation> obs;
  // Rays of both cameras meet behind them: mirror image of a point at z=5.
  for (double cx : {-1.0, 1.0}) {
    CameraPose pose;
    pose.translation = Eigen::Vector3d(-cx, 0, 0);
    const auto xy = ProjectPoint(intr, pose, Point3(0, 0, 5));
    // Reflect the pixel through the principal point: the ray now converges
    // at z = -5.
    const Eigen::Vector2d flipped(2 * intr.principal_x - xy->x(), xy->y());
    obs.push_back({intr, pose, flipped});
  }
  const auto result = TriangulatePoint(obs);
  ASSERT_FALSE(result.ok());
  EXPECT_EQ(result.error().code, ErrorCode::kCheirality);
}

// Nonlinear two-view oracle: Gauss-Newton on the reprojection error with
// numeric Jacobians, started from the midpoint of closest approach.
Point3 NonlinearTwoViewOracle(const std::vector<TriangulationObservation>& obs) {
  const Eigen::Vector3d c1 = obs[0].pose.Center();
  const Eigen::Vector3d c2 = obs[1].pose.Center();
  const Eigen::Vector3d d1 = ViewingRay(obs[0].intrinsics, obs[0].pose, obs[0].pixel);
  const Eigen::Vector3d d2 = ViewingRay(obs[1].intrinsics, obs[1].pose, obs[1].pixel);
  const Eigen::Vector3d w = c1 - c2;
  const double a = d1.dot(d1), b = d1.dot(d2), c = d2.dot(d2);
  const double d = d1.dot(w), e = d2.dot(w);
  const double denom = a * c - b * b;
  const double s = (b * e - c * d) / denom;
  const double t = (a * e - b * d) / denom;
  Eigen::Vector3d x = 0.5 * ((c1 + s * d1) + (c2 + t * d2));

  auto residual = [&](const Eigen::Vector3d& p) {
    Eigen::Vector4d r;
    for (int k = 0; k < 2; ++k) {
      const auto proj = ProjectPoint(obs[k].intrinsics, obs[k].pose, p);
      r.segment<2>(2 * k) = *proj - obs[k].pixel;
    }
    return r;
  };
  for (int iter = 0; iter < 20; ++iter) {
    const Eigen::Vector4d r0 = residual(x);
    Eigen::Matrix<double, 4, 3> j;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d h = Eigen::Vector3d::Zero();
      h(k) = 1e-6;
      j.col(k) = (residual(x + h) - residual(x - h)) / 2e-6;
    }
    const Eigen::Vector3d dx = (j.transpose() * j).ldlt().solve(-j.transpose() * r0);
    x += dx;
    if (dx.norm() < 1e-12) break;
  }
  return x;
}

TEST(TriangulatePoint, NoisyErrorWithinMonteCarloBound) {
  Rng rng(2024);
  const Point3 x(0, 0, 5);
  constexpr int kTrials = 2000;
  double dlt_sq = 0.0, oracle_sq = 0.0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto obs = TwoCameraSetup(x, 0.5, rng);
    const auto result = TriangulatePoint(obs);
    ASSERT_TRUE(result.ok());
    dlt_sq += (*result - x).squaredNorm();
    oracle_sq += (NonlinearTwoViewOracle(obs) - x).squaredNorm();
  }
  const double dlt_rms = std::sqrt(dlt_sq / kTrials);
  const double oracle_rms = std::sqrt(oracle_sq / kTrials);
  // The optimal estimator's Monte-Carlo RMS error bounds what a linear method
  // can reach; allow 10% on top of it.
  EXPECT_LE(dlt_rms, 1.1 * oracle_rms);
  EXPECT_GT(oracle_rms, 0.0);
}

TEST(TriangulatePoint, ProjectTriangulateRoundTrip) {
  Rng rng(99);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  const auto intr = testing::DefaultIntrinsics();
  for (int trial = 0; trial < 200; ++trial) {
    const Point3 x(coord(rng), coord(rng), coord(rng));
    std::vector<TriangulationObservation> obs;
    for (int k = 0; k < 4; ++k) {
      const double angle = 0.5 * k + 0.3 * coord(rng);
      const Eigen::Vector3d c(10 * std::cos(angle), 10 * std::sin(angle),
                              coord(rng));
      const CameraPose pose = testing::LookAt(c, Eigen::Vector3d::Zero());
      obs.push_back({intr, pose, *ProjectPoint(intr, pose, x)});
    }
    const auto result = TriangulatePoint(obs);
    ASSERT_TRUE(result.ok());
    // Scene scale is ~10 units.
    EXPECT_LT((*result - x).norm(), 1e-9 * 10);
  }
}

}  // namespace
}  // namespace psfm
