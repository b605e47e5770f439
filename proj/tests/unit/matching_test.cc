#include "psfm/matchgraph/matching.h"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "synthetic_scene.h"

namespace psfm {
namespace {

constexpr int kDim = 32;

Eigen::VectorXf RandomUnit(Rng& rng) {
  std::normal_distribution<float> n(0, 1);
  Eigen::VectorXf v(kDim);
  for (int d = 0; d < kDim; ++d) v(d) = n(rng);
  return v.normalized();
}

// Two cameras observing the same random points. Each point has one
// descriptor, observed with small noise in both images. `true_pairs` holds
// the generating correspondences.
struct PairScene {
  Dataset dataset;
  std::vector<FeatureMatch> true_pairs;
};

PairScene MakePairScene(int num_points, bool disjoint, std::uint64_t seed) {
  Rng rng(seed);
  const auto intr = testing::DefaultIntrinsics();
  const CameraPose p1 = testing::LookAt({-1, -10, 0}, {0, 0, 0});
  const CameraPose p2 = testing::LookAt({1, -10, 0.5}, {0, 0, 0});
  std::uniform_real_distribution<double> coord(-2, 2);
  std::normal_distribution<float> noise(0, 0.03f);

  PairScene scene;
  for (image_t id : {1u, 2u}) {
    scene.dataset.images[id] = {id, intr.image_width, intr.image_height};
    scene.dataset.intrinsics[id] = intr;
    scene.dataset.features[id].image_id = id;
  }
  std::vector<Eigen::VectorXf> d1, d2;
  auto add = [&](image_t id, const Eigen::Vector2d& xy,
                 const Eigen::VectorXf& desc, std::vector<Eigen::VectorXf>& out) {
    scene.dataset.features[id].keypoints.push_back({xy, 1.0});
    Eigen::VectorXf noisy = desc;
    for (int k = 0; k < kDim; ++k) noisy(k) += noise(rng);
    out.push_back(noisy.normalized());
    return static_cast<std::uint32_t>(out.size() - 1);
  };
  while (static_cast<int>(scene.true_pairs.size()) < num_points) {
    const Point3 x(coord(rng), coord(rng), coord(rng));
    const auto x1 = ProjectPoint(intr, p1, x);
    const auto x2 = ProjectPoint(intr, p2, x);
    if (!x1 || !x2) continue;
    const auto desc = RandomUnit(rng);
    const auto i1 = add(1, *x1, desc, d1);
    const auto i2 = add(2, *x2, disjoint ? RandomUnit(rng) : desc, d2);
    scene.true_pairs.push_back({i1, i2});
  }
  auto& f1 = scene.dataset.features[1].descriptors;
  auto& f2 = scene.dataset.features[2].descriptors;
  f1.resize(static_cast<long>(d1.size()), kDim);
  f2.resize(static_cast<long>(d2.size()), kDim);
  for (std::size_t i = 0; i < d1.size(); ++i) f1.row(i) = d1[i].transpose();
  for (std::size_t i = 0; i < d2.size(); ++i) f2.row(i) = d2[i].transpose();
  return scene;
}

TEST(Matching, MutualNearestNeighbourOnPermutedCopy) {
  Rng rng(1);
  DescriptorMatrix a(20, kDim), b(20, kDim);
  for (int i = 0; i < 20; ++i) {
    a.row(i) = RandomUnit(rng).transpose();
    b.row((i * 7) % 20) = a.row(i);
  }
  const auto m = MatchDescriptors(a, b, 0.8);
  ASSERT_EQ(m.size(), 20u);
  for (const auto& match : m) {
    EXPECT_EQ(match.idx_b, (match.idx_a * 7) % 20);
  }
}

TEST(Matching, RatioTestRejectsAmbiguousMatch) {
  DescriptorMatrix a(1, 2), b(2, 2);
  a << 1, 0;
  b << 0.99f, 0.1f, 0.99f, -0.1f;
  EXPECT_TRUE(MatchDescriptors(a, b, 0.8).empty());
  b.row(1) << 0, 1;
  EXPECT_EQ(MatchDescriptors(a, b, 0.8).size(), 1u);
}

TEST(Matching, NoiselessPairKeepsAllTrueMatches) {
  const auto scene = MakePairScene(200, false, 3);
  const auto pair = VerifyPair(1, 2, scene.dataset, {});
  ASSERT_TRUE(pair.has_value());
  EXPECT_EQ(pair->matches, scene.true_pairs);
}

TEST(Matching, DisjointContentIsDropped) {
  const auto scene = MakePairScene(200, true, 4);
  EXPECT_FALSE(VerifyPair(1, 2, scene.dataset, {}).has_value());
}

TEST(Matching, PlantedOutliersAreRemoved) {
  const auto scene = MakePairScene(200, false, 5);
  // 60% of the putative set is wrong: 200 true + 300 random pairings.
  Rng rng(6);
  std::uniform_int_distribution<std::uint32_t> idx(0, 199);
  MatchPair putative{1, 2, scene.true_pairs};
  std::set<std::pair<std::uint32_t, std::uint32_t>> truth;
  for (const auto& m : scene.true_pairs) truth.emplace(m.idx_a, m.idx_b);
  while (putative.matches.size() < 500) {
    const FeatureMatch m{idx(rng), idx(rng)};
    if (!truth.count({m.idx_a, m.idx_b})) putative.matches.push_back(m);
  }
  const auto verified = VerifyMatches(putative, scene.dataset, {});
  ASSERT_TRUE(verified.has_value());
  std::size_t correct = 0;
  for (const auto& m : verified->matches) correct += truth.count({m.idx_a, m.idx_b});
  EXPECT_GE(correct, 0.9 * verified->matches.size());
  EXPECT_GE(correct, 190u);
}

TEST(Matching, CandidatesVerifiedInParallelAreSorted) {
  auto scene = MakePairScene(100, false, 7);
  scene.dataset.images[3] = {3, 640, 480};
  scene.dataset.features[3] = scene.dataset.features[1];
  scene.dataset.features[3].image_id = 3;
  MatchingOptions opts;
  opts.num_workers = 3;
  const auto pairs = VerifyCandidates({{2, 3, 0}, {1, 2, 0}, {1, 3, 0}},
                                      scene.dataset, opts);
  ASSERT_GE(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].image_id_a, 1u);
  EXPECT_EQ(pairs[0].image_id_b, 2u);
}

}  // namespace
}  // namespace psfm
