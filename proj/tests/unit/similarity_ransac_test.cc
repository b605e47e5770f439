#include "psfm/merge/similarity_ransac.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "synthetic_scene.h"

namespace psfm {
namespace {

// Reference = truth seen by `ref_images`; source = truth seen by
// `src_images`, expressed in a frame that `to_reference` maps back.
struct Split {
  Reconstruction source, reference;
  CommonPointSet common;  // every shared point id, source -> reference
};

Split MakeSplit(const Reconstruction& truth, const std::set<image_t>& src_images,
                const std::set<image_t>& ref_images,
                const SimilarityTransform& to_reference) {
  Split s;
  s.reference = testing::SubReconstruction(truth, ref_images);
  s.source = testing::SubReconstruction(truth, src_images);
  s.source.ApplySimilarity(to_reference.Inverse());
  for (const auto& [id, p] : s.source.points) {
    const auto it = s.reference.points.find(id);
    if (it == s.reference.points.end()) continue;
    s.common.pairs.push_back(
        {id, id, 1, it->second.observations.size(), p.observations.size()});
  }
  return s;
}

SimilarityTransform Scale2Rot90() {
  SimilarityTransform t;
  t.scale = 2.0;
  t.rotation = Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ())
                   .toRotationMatrix();
  t.translation = Eigen::Vector3d(1, 2, 3);
  return t;
}

TEST(TransformResidual, IdentityOnSameModelIsPerPointRmsError) {
  const auto truth = testing::MakeRingReconstruction(8, 100, 0.7, 1);
  for (const auto& [id, point] : truth.points) {
    double sum = 0;
    for (const auto& obs : point.observations) sum += truth.SquaredError(point, obs);
    const double rms = std::sqrt(sum / point.observations.size());
    const CommonPointPair pair{id, id, 1, point.observations.size(),
                               point.observations.size()};
    EXPECT_NEAR(TransformResidual(pair, SimilarityTransform::Identity(), truth, truth),
                rms, 1e-12);
  }
}

TEST(TransformResidual, GeneratingTransformIsExact) {
  const auto truth = testing::MakeRingReconstruction(10, 200, 0.0, 2);
  const auto split = MakeSplit(truth, {1, 2, 3, 4}, {4, 5, 6, 7}, Scale2Rot90());
  ASSERT_GT(split.common.size(), 20u);
  for (const auto& pair : split.common.pairs) {
    EXPECT_LT(TransformResidual(pair, Scale2Rot90(), split.source, split.reference),
              1e-9);
  }
}

TEST(TransformResidual, WrongScaleGivesLargeResiduals) {
  const auto truth = testing::MakeRingReconstruction(10, 200, 0.0, 2);
  SimilarityTransform scale2;
  scale2.scale = 2.0;
  const auto split = MakeSplit(truth, {1, 2, 3, 4}, {4, 5, 6, 7}, scale2);
  for (const auto& pair : split.common.pairs) {
    const Point3 x = split.reference.points.at(pair.reference_point).xyz;
    if (x.norm() < 1.0) continue;
    EXPECT_GT(TransformResidual(pair, SimilarityTransform::Identity(),
                                split.source, split.reference),
              10.0);
  }
}

TEST(TransformResidual, SwappingRolesWithInverseIsSymmetric) {
  Rng rng(5);
  const auto truth = testing::MakeRingReconstruction(10, 200, 0.5, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = testing::RandomSimilarity(rng);
    const auto split = MakeSplit(truth, {1, 2, 3, 4, 5}, {5, 6, 7, 8}, t);
    // Evaluate at a slightly wrong transform so residuals are not tiny.
    SimilarityTransform guess = t;
    guess.scale *= 1.01;
    for (const auto& p : split.common.pairs) {
      const CommonPointPair swapped{p.reference_point, p.source_point, p.support,
                                    p.l, p.m};
      const double forward =
          TransformResidual(p, guess, split.source, split.reference);
      const double backward = TransformResidual(swapped, guess.Inverse(),
                                                split.reference, split.source);
      EXPECT_NEAR(forward, backward, 1e-9 * std::max(1.0, forward));
    }
  }
}

TEST(TransformResidual, BehindCameraIsInfinite) {
  const auto truth = testing::MakeRingReconstruction(6, 50, 0.0, 4);
  const auto& [id, point] = *truth.points.begin();
  const auto& cam = truth.images.at(point.observations.front().image_id).pose;
  // Move the point five units behind one of its observing cameras.
  SimilarityTransform t;
  t.translation = cam.Center() - 5.0 * cam.ViewingDirection() - point.xyz;
  const CommonPointPair pair{id, id, 1, point.observations.size(),
                             point.observations.size()};
  EXPECT_TRUE(std::isinf(TransformResidual(pair, t, truth, truth)));
}

TEST(SimilarityRansac, ExactPairsRecoverTransform) {
  Rng rng(9);
  const auto truth = testing::MakeRingReconstruction(10, 400, 0.0, 6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = testing::RandomSimilarity(rng);
    auto split = MakeSplit(truth, {1, 2, 3, 4, 5}, {4, 5, 6, 7, 8}, t);
    ASSERT_GE(split.common.size(), 50u);
    split.common.pairs.resize(50);
    SimilarityRansacOptions options;
    options.seed = trial;
    const auto fit =
        EstimateSimilarityRansac(split.common, split.source, split.reference, options);
    ASSERT_TRUE(fit.ok()) << fit.error().message;
    EXPECT_EQ(fit->num_inliers, 50u);
    EXPECT_NEAR(fit->transform.scale, t.scale, 1e-9 * t.scale);
    EXPECT_LT((fit->transform.rotation - t.rotation).norm(), 1e-9);
    EXPECT_LT((fit->transform.translation - t.translation).norm(), 1e-9);
    EXPECT_LT(fit->mse, 1e-18);
  }
}

TEST(SimilarityRansac, PlantedOutliersAreClassified) {
  Rng rng(11);
  const auto truth = testing::MakeRingReconstruction(10, 400, 0.5, 7);
  const auto t = testing::RandomSimilarity(rng);
  auto split = MakeSplit(truth, {1, 2, 3, 4, 5}, {4, 5, 6, 7, 8}, t);
  ASSERT_GE(split.common.size(), 100u);
  // Point positions are exact, so inliers sit near the pixel noise level.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<char> is_outlier(split.common.size(), 0);
  for (std::size_t i = 0; i < split.common.size(); ++i) {
    if (u(rng) >= 0.3) continue;
    is_outlier[i] = 1;
    auto& x = split.source.points.at(split.common.pairs[i].source_point).xyz;
    x += Eigen::Vector3d::Random().normalized() * (0.5 + u(rng)) / t.scale;
  }
  SimilarityRansacOptions options;
  const auto fit =
      EstimateSimilarityRansac(split.common, split.source, split.reference, options);
  ASSERT_TRUE(fit.ok());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < is_outlier.size(); ++i) {
    correct += (fit->inlier_mask[i] != 0) == !is_outlier[i];
  }
  EXPECT_GE(static_cast<double>(correct) / is_outlier.size(), 0.95);
  EXPECT_LT(RotationAngularDistance(fit->transform.rotation, t.rotation) * 180 /
                std::numbers::pi,
            0.1);
}

TEST(SimilarityRansac, TwoPairsIsAPreconditionError) {
  const auto truth = testing::MakeRingReconstruction(6, 50, 0.0, 4);
  auto split = MakeSplit(truth, {1, 2, 3}, {3, 4, 5}, {});
  split.common.pairs.resize(2);
  const auto fit =
      EstimateSimilarityRansac(split.common, split.source, split.reference, {});
  ASSERT_FALSE(fit.ok());
  EXPECT_EQ(fit.error().code, ErrorCode::kInvalidArgument);
}

TEST(SimilarityRansac, RandomPairingHasNoConsensus) {
  const auto truth = testing::MakeRingReconstruction(10, 300, 0.0, 4);
  auto split = MakeSplit(truth, {1, 2, 3, 4, 5}, {4, 5, 6, 7, 8}, {});
  // Pair each source point with an unrelated reference point.
  std::vector<point3D_t> ids;
  for (const auto& p : split.common.pairs) ids.push_back(p.reference_point);
  std::rotate(ids.begin(), ids.begin() + ids.size() / 2, ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    split.common.pairs[i].reference_point = ids[i];
    split.common.pairs[i].m = split.reference.points.at(ids[i]).observations.size();
  }
  SimilarityRansacOptions options;
  options.max_iterations = 500;
  const auto fit =
      EstimateSimilarityRansac(split.common, split.source, split.reference, options);
  ASSERT_FALSE(fit.ok());
  EXPECT_EQ(fit.error().code, ErrorCode::kNoConsensus);
}

}  // namespace
}  // namespace psfm
