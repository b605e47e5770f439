#include "psfm/merge/georeference.h"

#include <iterator>
#include <sstream>

#include <gtest/gtest.h>

#include "psfm/geometry/triangulation.h"
#include "synthetic_scene.h"

namespace psfm {
namespace {

struct GeoScene {
  Reconstruction truth;
  std::vector<GcpRecord> gcps;
};

// Ring scene in the survey frame with ten GCPs, the first three control.
// Scene observations and GCP clicks both get `noise_px`.
GeoScene MakeGeoScene(double noise_px, std::uint64_t noise_seed) {
  GeoScene s;
  s.truth = testing::MakeRingReconstruction(12, 400, 0.0, 100);
  Rng layout(1);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  Rng rng(noise_seed);
  for (auto& [id, p] : s.truth.points) {
    for (auto& obs : p.observations) obs.xy += testing::GaussianNoise2(rng, noise_px);
  }
  for (std::uint32_t g = 0; g < 10; ++g) {
    GcpRecord gcp;
    gcp.gcp_id = g + 1;
    gcp.world = Point3(coord(layout), coord(layout), coord(layout));
    gcp.role = g < 3 ? GcpRole::kControl : GcpRole::kCheck;
    for (const auto& [id, image] : s.truth.images) {
      const auto px = ProjectPoint(image.intrinsics, image.pose, gcp.world);
      if (px) gcp.observations.push_back({id, *px + testing::GaussianNoise2(rng, noise_px)});
    }
    s.gcps.push_back(gcp);
  }
  return s;
}

// Reference estimator: triangulate every GCP with the true cameras, align
// the triangulated controls to the survey, and measure the check points.
AxisStats OracleStats(const GeoScene& s) {
  std::vector<Point3> model, survey;
  std::vector<std::pair<Point3, Point3>> checks;
  for (const auto& gcp : s.gcps) {
    std::vector<TriangulationObservation> obs;
    for (const auto& o : gcp.observations) {
      const auto& image = s.truth.images.at(o.image_id);
      obs.push_back({image.intrinsics, image.pose, o.pixel});
    }
    const Point3 x = *TriangulatePoint(obs);
    if (gcp.role == GcpRole::kControl) {
      model.push_back(x);
      survey.push_back(gcp.world);
    } else {
      checks.emplace_back(x, gcp.world);
    }
  }
  const auto align = EstimateSimilarityUmeyama(model, survey);
  std::vector<CheckPointResidual> residuals;
  for (const auto& [x, w] : checks) {
    residuals.push_back({0, align->transform.Apply(x) - w});
  }
  return ComputeAxisStats(residuals);
}

// The scene as a relative model: adjusted, then moved to an arbitrary frame.
Reconstruction RelativeModel(const GeoScene& s, std::uint64_t seed) {
  Reconstruction model = s.truth;
  BundleAdjust(model, {});
  Rng rng(seed);
  model.ApplySimilarity(testing::RandomSimilarity(rng));
  return model;
}

TEST(Georeference, NoiselessCheckPointsAreExact) {
  const auto scene = MakeGeoScene(0.0, 1);
  const auto result = Georeference(RelativeModel(scene, 2), scene.gcps);
  ASSERT_TRUE(result.ok()) << result.error().message;
  EXPECT_EQ(result->num_controls, 3u);
  ASSERT_EQ(result->check_residuals.size(), 7u);
  for (const auto& r : result->check_residuals) {
    EXPECT_LT(r.delta.norm(), 1e-9) << "gcp " << r.gcp_id;
  }
  // The model lands in the survey frame.
  for (const auto& [id, image] : result->model.images) {
    EXPECT_LT((image.pose.Center() - scene.truth.images.at(id).pose.Center()).norm(),
              1e-9);
  }
}

TEST(Georeference, NoisyStdStaysWithinMonteCarloOracle) {
  Eigen::Vector3d geo_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d oracle_mean = Eigen::Vector3d::Zero();
  constexpr int kSeeds = 20;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto scene = MakeGeoScene(0.5, 1000 + seed);
    const auto result = Georeference(RelativeModel(scene, seed), scene.gcps);
    ASSERT_TRUE(result.ok());
    ASSERT_EQ(result->check_residuals.size(), 7u);
    geo_mean += result->stats.std_dev / kSeeds;
    oracle_mean += OracleStats(scene).std_dev / kSeeds;
  }
  for (int axis = 0; axis < 3; ++axis) {
    EXPECT_LE(geo_mean[axis], 1.3 * oracle_mean[axis]) << "axis " << axis;
  }
}

TEST(Georeference, TwoControlsAreRejected) {
  auto scene = MakeGeoScene(0.0, 1);
  scene.gcps[2].role = GcpRole::kCheck;
  const auto result = Georeference(scene.truth, scene.gcps);
  ASSERT_FALSE(result.ok());
  EXPECT_EQ(result.error().code, ErrorCode::kInvalidArgument);
}

TEST(Georeference, CollinearControlsAreRejected) {
  auto scene = MakeGeoScene(0.0, 1);
  for (int g = 0; g < 3; ++g) {
    auto& gcp = scene.gcps[g];
    gcp.world = Point3(0.5 * g, 0.25 * g, 0.1);
    gcp.observations.clear();
    for (const auto& [id, image] : scene.truth.images) {
      gcp.observations.push_back(
          {id, *ProjectPoint(image.intrinsics, image.pose, gcp.world)});
    }
  }
  const auto result = Georeference(scene.truth, scene.gcps);
  ASSERT_FALSE(result.ok());
  EXPECT_EQ(result.error().code, ErrorCode::kDegenerate);
}

TEST(Georeference, AxisStatsUseAbsoluteResiduals) {
  const std::vector<CheckPointResidual> r = {
      {1, {1.0, -2.0, 0.5}}, {2, {-3.0, 2.0, 0.5}}, {3, {2.0, 0.0, -2.0}}};
  const auto s = ComputeAxisStats(r);
  EXPECT_EQ(s.max, Eigen::Vector3d(3.0, 2.0, 2.0));
  EXPECT_NEAR(s.mean.x(), 2.0, 1e-15);
  EXPECT_NEAR(s.mean.y(), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.mean.z(), 1.0, 1e-15);
  // Sample deviation of {1, 3, 2} is 1.
  EXPECT_NEAR(s.std_dev.x(), 1.0, 1e-15);
}

TEST(Georeference, TableHasMaxMeanStdPerAxis) {
  GeoreferenceResult result;
  result.stats.max = Eigen::Vector3d(0.04, 0.052, 0.08);
  result.stats.mean = Eigen::Vector3d(0.016, 0.02, 0.036);
  result.stats.std_dev = Eigen::Vector3d(0.02, 0.024, 0.031);
  const std::string table = FormatResidualTable(result, "Ours");
  std::istringstream in(table);
  std::string header, axes, row;
  std::getline(in, header);
  std::getline(in, axes);
  std::getline(in, row);
  EXPECT_NE(header.find("Max (m)"), std::string::npos);
  EXPECT_LT(header.find("Max (m)"), header.find("Mean (m)"));
  EXPECT_LT(header.find("Mean (m)"), header.find("Std.dev. (m)"));
  std::istringstream axis_tokens(axes);
  std::vector<std::string> tokens{std::istream_iterator<std::string>(axis_tokens), {}};
  EXPECT_EQ(tokens, (std::vector<std::string>{"|X|", "|Y|", "|Z|", "|X|", "|Y|",
                                              "|Z|", "|X|", "|Y|", "|Z|"}));
  std::istringstream row_tokens(row);
  std::vector<std::string> values{std::istream_iterator<std::string>(row_tokens), {}};
  EXPECT_EQ(values, (std::vector<std::string>{"Ours", "0.040", "0.052", "0.080",
                                              "0.016", "0.020", "0.036", "0.020",
                                              "0.024", "0.031"}));
}

}  // namespace
}  // namespace psfm
