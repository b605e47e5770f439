#include "psfm/geometry/resection.h"

#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "synthetic_scene.h"

namespace psfm {
namespace {

struct ResectionData {
  CameraPose pose;
  std::vector<Point3> points;
  std::vector<Eigen::Vector2d> pixels;
  std::vector<char> is_inlier;
};

ResectionData MakeResection(int n, double outlier_ratio, double noise,
                            std::uint64_t seed) {
  Rng rng(seed);
  const auto intr = testing::DefaultIntrinsics();
  ResectionData data;
  data.pose = testing::LookAt(Eigen::Vector3d(3, -6, 2), Eigen::Vector3d::Zero());
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 640.0), v(0.0, 480.0);
  while (static_cast<int>(data.points.size()) < n) {
    const Point3 x(coord(rng), coord(rng), coord(rng));
    const auto xy = ProjectPoint(intr, data.pose, x);
    if (!xy) continue;
    data.points.push_back(x);
    if (unit(rng) < outlier_ratio) {
      data.pixels.emplace_back(u(rng), v(rng));
      data.is_inlier.push_back(0);
    } else {
      data.pixels.push_back(*xy + testing::GaussianNoise2(rng, noise));
      data.is_inlier.push_back(1);
    }
  }
  return data;
}

TEST(ResectCamera, ExactCorrespondencesRecoverPose) {
  const auto data = MakeResection(60, 0.0, 0.0, 1);
  const auto result =
      ResectCamera(data.points, data.pixels, testing::DefaultIntrinsics());
  ASSERT_TRUE(result.ok()) << result.error().message;
  EXPECT_LT(RotationAngularDistance(result->pose.rotation, data.pose.rotation),
            1e-6);
  EXPECT_LT((result->pose.Center() - data.pose.Center()).norm(), 1e-6);
  EXPECT_EQ(result->num_inliers, 60u);
}

TEST(ResectCamera, OutliersAreClassified) {
  const auto data = MakeResection(200, 0.3, 0.5, 2);
  const auto result =
      ResectCamera(data.points, data.pixels, testing::DefaultIntrinsics());
  ASSERT_TRUE(result.ok()) << result.error().message;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.is_inlier.size(); ++i) {
    correct += (result->inlier_mask[i] != 0) == (data.is_inlier[i] != 0);
  }
  EXPECT_GE(static_cast<double>(correct), 0.95 * data.is_inlier.size());
  EXPECT_LT(RotationAngularDistance(result->pose.rotation, data.pose.rotation),
            1e-2);
}

TEST(ResectCamera, FiveCorrespondencesRejected) {
  const auto data = MakeResection(5, 0.0, 0.0, 3);
  const auto result =
      ResectCamera(data.points, data.pixels, testing::DefaultIntrinsics());
  ASSERT_FALSE(result.ok());
  EXPECT_EQ(result.error().code, ErrorCode::kInvalidArgument);
}

// Aerial scenes are close to planar; the minimal solver must not care.
TEST(ResectCamera, CoplanarPointsRecoverPose) {
  auto data = MakeResection(30, 0.0, 0.0, 4);
  const auto intr = testing::DefaultIntrinsics();
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    data.points[i].z() = 0.0;
    data.pixels[i] = *ProjectPoint(intr, data.pose, data.points[i]);
  }
  const auto result = ResectCamera(data.points, data.pixels, intr);
  ASSERT_TRUE(result.ok()) << result.error().message;
  EXPECT_LT((result->pose.Center() - data.pose.Center()).norm(), 1e-6);
  EXPECT_EQ(result->num_inliers, 30u);
}

TEST(EstimatePoseP3P, OneSolutionIsExact) {
  for (int seed = 0; seed < 100; ++seed) {
    const auto data = MakeResection(3, 0.0, 0.0, 100 + seed);
    const auto poses =
        EstimatePoseP3P(data.points, data.pixels, testing::DefaultIntrinsics());
    ASSERT_FALSE(poses.empty()) << seed;
    ASSERT_LE(poses.size(), 4u);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& pose : poses) {
      best = std::min(best, (pose.Center() - data.pose.Center()).norm() +
                                RotationAngularDistance(pose.rotation, data.pose.rotation));
    }
    EXPECT_LT(best, 1e-7) << seed;
  }
}

TEST(EstimatePoseP3P, CollinearPointsGiveNothing) {
  auto data = MakeResection(3, 0.0, 0.0, 7);
  const auto intr = testing::DefaultIntrinsics();
  data.points[2] = 2.0 * data.points[1] - data.points[0];
  data.pixels[2] = *ProjectPoint(intr, data.pose, data.points[2]);
  EXPECT_TRUE(EstimatePoseP3P(data.points, data.pixels, intr).empty());
}

TEST(EstimatePoseDlt, MinimalSampleIsExact) {
  const auto data = MakeResection(6, 0.0, 0.0, 5);
  const auto pose =
      EstimatePoseDlt(data.points, data.pixels, testing::DefaultIntrinsics());
  ASSERT_TRUE(pose.ok());
  EXPECT_LT(RotationAngularDistance(pose->rotation, data.pose.rotation), 1e-7);
  EXPECT_LT(RotationOrthonormalityError(pose->rotation), 1e-9);
}

}  // namespace
}  // namespace psfm
