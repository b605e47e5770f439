#include "psfm/sfm/incremental_mapper.h"

#include <gtest/gtest.h>

#include "psfm/geometry/similarity.h"
#include "psfm/sfm/reconstruction_checker.h"
#include "synthetic_scene.h"

namespace psfm {
namespace {

std::vector<image_t> AllImages(const Dataset& d) {
  std::vector<image_t> out;
  for (const auto& [id, meta] : d.images) out.push_back(id);
  return out;
}

struct PoseErrors {
  double max_center = 0;    // after similarity alignment, truth units
  double max_rotation = 0;  // radians
};

PoseErrors CompareToTruth(const Reconstruction& recon, const Reconstruction& truth) {
  std::vector<Point3> src, dst;
  for (const auto& [id, image] : recon.images) {
    src.push_back(image.pose.Center());
    dst.push_back(truth.images.at(id).pose.Center());
  }
  const auto sim = EstimateSimilarityUmeyama(src, dst);
  EXPECT_TRUE(sim.ok());
  PoseErrors e;
  for (const auto& [id, image] : recon.images) {
    const CameraPose aligned = sim->transform.ApplyToPose(image.pose);
    const auto& gt = truth.images.at(id).pose;
    e.max_center = std::max(e.max_center, (aligned.Center() - gt.Center()).norm());
    e.max_rotation = std::max(
        e.max_rotation, RotationAngularDistance(aligned.rotation, gt.rotation));
  }
  return e;
}

TEST(IncrementalMapper, NoiselessRingIsRecoveredExactly) {
  auto ring = testing::MakeRingDataset(10, 300, 0.0, 1);
  MapperReport report;
  const auto recon = IncrementalReconstruct(AllImages(ring.dataset), ring.dataset,
                                            ring.dataset.matches, {}, &report);
  ASSERT_TRUE(recon.ok()) << recon.error().message;
  EXPECT_EQ(recon->NumImages(), 10u);
  EXPECT_TRUE(report.unregistered.empty());
  EXPECT_LT(recon->MeanReprojectionError(), 1e-6);
  const auto err = CompareToTruth(*recon, ring.truth);
  EXPECT_LT(err.max_center, 1e-6 * 16);  // scene diameter ~16
  EXPECT_LT(err.max_rotation, 1e-6);
  EXPECT_TRUE(CheckReconstruction(*recon).empty());
  EXPECT_GE(recon->NumPoints(), 290u);
}

TEST(IncrementalMapper, NoisyRingErrorMatchesNoiseLevel) {
  auto ring = testing::MakeRingDataset(10, 300, 0.5, 2);
  const auto recon = IncrementalReconstruct(AllImages(ring.dataset), ring.dataset,
                                            ring.dataset.matches, {});
  ASSERT_TRUE(recon.ok());
  EXPECT_EQ(recon->NumImages(), 10u);
  // E|e| for isotropic 2D noise of sigma 0.5 is 0.5 * sqrt(pi/2) = 0.63,
  // slightly reduced by the fitted parameters.
  const double mean = recon->MeanReprojectionError();
  EXPECT_GE(mean, 0.2);
  EXPECT_LE(mean, 0.8);
  EXPECT_TRUE(CheckReconstruction(*recon).empty());
}

TEST(IncrementalMapper, DisconnectedSubsetReconstructsLargerComponent) {
  auto big = testing::MakeRingDataset(8, 200, 0.0, 3);
  auto small = testing::MakeRingDataset(4, 200, 0.0, 4);
  // Append the small ring under ids 101.. with no matches to the big one.
  Dataset d = big.dataset;
  for (const auto& [id, meta] : small.dataset.images) {
    const image_t nid = id + 100;
    d.images[nid] = {nid, meta.width, meta.height};
    d.intrinsics[nid] = small.dataset.intrinsics.at(id);
    d.features[nid] = small.dataset.features.at(id);
    d.features[nid].image_id = nid;
  }
  for (auto p : small.dataset.matches) {
    p.image_id_a += 100;
    p.image_id_b += 100;
    d.matches.push_back(p);
  }
  MapperReport report;
  const auto recon = IncrementalReconstruct(AllImages(d), d, d.matches, {}, &report);
  ASSERT_TRUE(recon.ok());
  EXPECT_EQ(recon->NumImages(), 8u);
  EXPECT_EQ(report.unregistered,
            (std::vector<image_t>{101, 102, 103, 104}));
}

TEST(IncrementalMapper, DeterministicAcrossRuns) {
  auto ring = testing::MakeRingDataset(8, 200, 0.5, 5);
  MapperReport r1, r2;
  const auto a = IncrementalReconstruct(AllImages(ring.dataset), ring.dataset,
                                        ring.dataset.matches, {}, &r1);
  const auto b = IncrementalReconstruct(AllImages(ring.dataset), ring.dataset,
                                        ring.dataset.matches, {}, &r2);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->registered_order, b->registered_order);
  EXPECT_EQ(r1.final_global_cost, r2.final_global_cost);
  for (const auto& [id, image] : a->images) {
    EXPECT_EQ(image.pose.rotation, b->images.at(id).pose.rotation);
  }
}

TEST(IncrementalMapper, SubsetUsesOnlyIntraSubsetPairs) {
  auto ring = testing::MakeRingDataset(10, 300, 0.0, 6);
  const std::vector<image_t> subset = {1, 2, 3, 4, 5};
  const auto recon = IncrementalReconstruct(subset, ring.dataset,
                                            ring.dataset.matches, {});
  ASSERT_TRUE(recon.ok());
  EXPECT_EQ(recon->NumImages(), 5u);
  for (const auto& [id, point] : recon->points) {
    for (const auto& obs : point.observations) EXPECT_LE(obs.image_id, 5u);
  }
}

TEST(IncrementalMapper, EmptySubsetIsAnError) {
  auto ring = testing::MakeRingDataset(3, 50, 0.0, 7);
  EXPECT_FALSE(IncrementalReconstruct({}, ring.dataset, ring.dataset.matches, {}).ok());
}

}  // namespace
}  // namespace psfm
