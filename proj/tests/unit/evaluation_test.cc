#include "psfm/pipeline/evaluation.h"

#include <gtest/gtest.h>

#include "synthetic_scene.h"

namespace psfm {
namespace {

TEST(Evaluate, TruthAgainstItselfIsPerfect) {
  const auto truth = testing::MakeRingReconstruction(8, 200, 0.0, 1);
  const EvalMetrics m = Evaluate(truth, truth);
  ASSERT_TRUE(m.aligned);
  EXPECT_EQ(m.aligned_cameras, 8u);
  EXPECT_EQ(m.registered_images, 8u);
  EXPECT_EQ(m.num_points, truth.points.size());
  EXPECT_LT(m.position_rmse, 1e-9);
  EXPECT_LT(m.rotation_error_max_deg, 1e-6);
}

TEST(Evaluate, InvariantToSimilarity) {
  auto truth = testing::MakeRingReconstruction(8, 200, 0.0, 2);
  auto recon = truth;
  testing::PerturbReconstruction(recon, 1e-3, 3, false);
  const EvalMetrics direct = Evaluate(recon, truth);
  Rng rng(4);
  recon.ApplySimilarity(testing::RandomSimilarity(rng));
  const EvalMetrics moved = Evaluate(recon, truth);
  EXPECT_GT(direct.position_rmse, 0);
  EXPECT_NEAR(moved.position_rmse, direct.position_rmse, 1e-9);
  EXPECT_NEAR(moved.rotation_error_mean_deg, direct.rotation_error_mean_deg, 1e-6);
}

TEST(Evaluate, TooFewSharedCamerasIsNotAligned) {
  const auto truth = testing::MakeRingReconstruction(8, 200, 0.0, 5);
  const auto part = testing::SubReconstruction(truth, {1, 2});
  const EvalMetrics m = Evaluate(part, truth);
  EXPECT_FALSE(m.aligned);
  EXPECT_EQ(m.registered_images, 2u);
}

TEST(Evaluate, JsonCarriesTimingSeparately) {
  EvalMetrics m;
  m.stage_seconds["merge"] = 1.5;
  const auto json = ToJson(m);
  EXPECT_DOUBLE_EQ(json.at("timing").at("merge").get<double>(), 1.5);
  EXPECT_TRUE(json.contains("mean_reprojection_error_px"));
}

}  // namespace
}  // namespace psfm
