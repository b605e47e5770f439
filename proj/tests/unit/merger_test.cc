#include "psfm/merge/merger.h"

#include <gtest/gtest.h>

#include "psfm/sfm/incremental_mapper.h"
#include "psfm/sfm/reconstruction_checker.h"
#include "synthetic_scene.h"

namespace psfm {
namespace {

MatchStore StoreOf(const std::vector<MatchPair>& pairs) {
  return MatchStore(std::make_shared<const std::vector<MatchPair>>(pairs));
}

std::vector<CommonPointPair> SelfPairs(const Reconstruction& r) {
  std::vector<CommonPointPair> pairs;
  for (const auto& [id, p] : r.points) {
    pairs.push_back({id, id, 1, p.observations.size(), p.observations.size()});
  }
  return pairs;
}

// Camera-centre RMSE after aligning `recon` onto `truth`.
double AlignedCenterRmse(const Reconstruction& recon, const Reconstruction& truth) {
  std::vector<Point3> src, dst;
  for (const auto& [id, image] : recon.images) {
    src.push_back(image.pose.Center());
    dst.push_back(truth.images.at(id).pose.Center());
  }
  const auto sim = EstimateSimilarityUmeyama(src, dst);
  EXPECT_TRUE(sim.ok());
  return std::sqrt(sim->mse);
}

TEST(MergePair, SelfMergeUnderIdentityChangesNothing) {
  const auto truth = testing::MakeRingReconstruction(8, 150, 0.4, 1);
  const auto merged =
      MergePair(truth, truth, SimilarityTransform::Identity(), SelfPairs(truth));
  EXPECT_EQ(merged.NumImages(), truth.NumImages());
  EXPECT_EQ(merged.NumPoints(), truth.NumPoints());
  EXPECT_EQ(merged.NumObservations(), truth.NumObservations());
  EXPECT_EQ(merged.registered_order, truth.registered_order);
  for (const auto& [id, p] : truth.points) {
    EXPECT_EQ(merged.points.at(id).observations.size(), p.observations.size());
    EXPECT_EQ(merged.points.at(id).xyz, p.xyz);
  }
}

TEST(MergePair, HalfScenesSharingTwentyTracks) {
  auto ring = testing::MakeRingDataset(12, 500, 0.0, 2);
  const auto store = StoreOf(ring.dataset.matches);
  const std::set<image_t> a_images = {1, 2, 3, 4, 5, 6};
  const std::set<image_t> b_images = {7, 8, 9, 10, 11, 12};
  const auto a = testing::SubReconstruction(ring.truth, a_images);
  std::set<point3D_t> shared;
  for (const auto& [id, p] : a.points) {
    if (shared.size() < 20 &&
        testing::SubReconstruction(ring.truth, b_images, [id = id](point3D_t x) {
          return x == id;
        }).NumPoints() == 1) {
      shared.insert(id);
    }
  }
  ASSERT_EQ(shared.size(), 20u);
  auto b = testing::SubReconstruction(ring.truth, b_images, [&](point3D_t id) {
    return !a.points.count(id) || shared.count(id);
  });
  Rng rng(3);
  const auto to_global = testing::RandomSimilarity(rng);
  b.ApplySimilarity(to_global.Inverse());

  const auto common = FindCommonPoints(BuildCorrespondenceGraph(b, a, store), b, a);
  ASSERT_EQ(common.size(), 20u);
  const auto fit = EstimateSimilarityRansac(common, b, a, {});
  ASSERT_TRUE(fit.ok());
  EXPECT_EQ(fit->num_inliers, 20u);
  const auto merged = MergePair(a, b, fit->transform, common.pairs);

  EXPECT_EQ(merged.NumImages(), 12u);
  EXPECT_EQ(merged.NumPoints(), a.NumPoints() + b.NumPoints() - 20);
  for (const point3D_t id : shared) {
    EXPECT_EQ(merged.points.at(id).observations.size(),
              a.points.at(id).observations.size() + b.points.at(id).observations.size());
  }
  EXPECT_TRUE(CheckReconstruction(merged).empty());
  EXPECT_LT(merged.MeanReprojectionError(), 1e-6);
}

TEST(MergePair, ClusterInsideGlobalAddsNothing) {
  const auto truth = testing::MakeRingReconstruction(8, 150, 0.0, 4);
  auto cluster = testing::SubReconstruction(truth, {3, 4, 5});
  SimilarityTransform t;
  t.scale = 0.5;
  t.translation = Eigen::Vector3d(1, -1, 2);
  cluster.ApplySimilarity(t.Inverse());
  const auto merged = MergePair(truth, cluster, t, SelfPairs(cluster));
  EXPECT_EQ(merged.NumImages(), truth.NumImages());
  EXPECT_EQ(merged.NumPoints(), truth.NumPoints());
  EXPECT_EQ(merged.NumObservations(), truth.NumObservations());
}

TEST(MergeAll, MergesLargestCommonCountFirstAndDropsIsolatedCluster) {
  auto ring = testing::MakeRingDataset(12, 400, 0.0, 5);
  const auto store = StoreOf(ring.dataset.matches);
  const auto global = testing::SubReconstruction(ring.truth, {1, 2, 3, 4});
  std::vector<point3D_t> global_ids;
  for (const auto& [id, p] : global.points) global_ids.push_back(id);

  // Cluster k keeps wanted[k] of the global points, taken from disjoint
  // stretches of the id list, plus whatever the global model lacks.
  const std::vector<std::set<image_t>> images = {{5, 6}, {7, 8}, {9, 10}};
  const std::vector<std::size_t> wanted = {5, 40, 12};
  Rng rng(6);
  std::vector<Reconstruction> clusters;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::set<point3D_t> keep(global_ids.begin() + 100 * k,
                                   global_ids.begin() + 100 * k + 100);
    auto full = testing::SubReconstruction(ring.truth, images[k]);
    std::size_t taken = 0;
    std::set<point3D_t> chosen;
    for (const auto& [id, p] : full.points) {
      if (keep.count(id) && taken < wanted[k]) {
        chosen.insert(id);
        ++taken;
      }
    }
    ASSERT_EQ(taken, wanted[k]);
    auto c = testing::SubReconstruction(ring.truth, images[k], [&](point3D_t id) {
      return !global.points.count(id) || chosen.count(id);
    });
    c.ApplySimilarity(testing::RandomSimilarity(rng));
    clusters.push_back(std::move(c));
  }
  // A model of other images with no matches into the dataset.
  auto isolated = testing::MakeRingReconstruction(4, 50, 0.0, 7);
  Reconstruction renamed;
  for (const auto& [id, image] : isolated.images) {
    renamed.AddImage(100 + id, image.intrinsics, image.pose);
  }
  for (auto [id, p] : isolated.points) {
    for (auto& obs : p.observations) obs.image_id += 100;
    renamed.InsertPoint(id, p);
  }
  clusters.push_back(renamed);

  MergeOptions options;
  options.run_final_ba = false;
  MergeReport report;
  const auto merged = MergeAll(global, clusters, store, options, &report);

  ASSERT_EQ(report.steps.size(), 3u);
  EXPECT_EQ(report.steps[0].cluster_index, 1u);
  EXPECT_EQ(report.steps[0].candidate_counts,
            (std::map<std::size_t, std::size_t>{{0, 5}, {1, 40}, {2, 12}, {3, 0}}));
  for (const auto& step : report.steps) {
    std::size_t best = 0;
    for (const auto& [index, count] : step.candidate_counts) best = std::max(best, count);
    EXPECT_EQ(step.common_points, best);
    EXPECT_LE(step.on_demand.matches, step.pairwise.matches);
    EXPECT_LE(step.pairwise.matches, step.all_dataset.matches);
  }
  EXPECT_EQ(report.dropped, (std::vector<std::size_t>{3}));
  EXPECT_EQ(report.dropped_common_points.at(3), 0u);
  EXPECT_EQ(merged.NumImages(), 10u);
  EXPECT_TRUE(CheckReconstruction(merged).empty());
  EXPECT_LT(AlignedCenterRmse(merged, ring.truth), 1e-8);
}

TEST(MergeAll, IndependentReconstructionsMergeIntoOneModel) {
  auto ring = testing::MakeRingDataset(16, 600, 0.5, 8);
  MapperOptions mapper;
  const auto global = IncrementalReconstruct({1, 4, 7, 10, 13, 16}, ring.dataset,
                                             ring.dataset.matches, mapper);
  ASSERT_TRUE(global.ok());
  std::vector<Reconstruction> clusters;
  for (const auto& subset : std::vector<std::vector<image_t>>{
           {1, 2, 3, 4, 5}, {6, 7, 8, 9, 10, 11}, {12, 13, 14, 15, 16}}) {
    auto c = IncrementalReconstruct(subset, ring.dataset, ring.dataset.matches, mapper);
    ASSERT_TRUE(c.ok());
    clusters.push_back(std::move(*c));
  }
  MergeOptions options;
  MergeReport report;
  const auto merged = MergeAll(*global, clusters,
                               StoreOf(ring.dataset.matches), options, &report);
  EXPECT_EQ(report.steps.size(), 3u);
  EXPECT_TRUE(report.dropped.empty());
  EXPECT_EQ(merged.NumImages(), 16u);
  EXPECT_LE(report.mean_error_after_ba, report.mean_error_before_ba);
  EXPECT_LT(report.mean_error_after_ba, 0.8);
  EXPECT_TRUE(CheckReconstruction(merged).empty());
  // Scene radius is about 8 units.
  EXPECT_LT(AlignedCenterRmse(merged, ring.truth), 0.02);
}

TEST(MergeAll, EmptyGlobalModelIsRejected) {
  EXPECT_THROW(MergeAll(Reconstruction{}, {}, MatchStore{}, {}), std::invalid_argument);
}

}  // namespace
}  // namespace psfm
