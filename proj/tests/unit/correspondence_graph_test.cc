#include "psfm/merge/correspondence_graph.h"

#include <gtest/gtest.h>

#include "psfm/merge/common_points.h"
#include "synthetic_scene.h"

namespace psfm {
namespace {

MatchStore StoreOf(std::vector<MatchPair> pairs) {
  return MatchStore(std::make_shared<const std::vector<MatchPair>>(std::move(pairs)));
}

Reconstruction WithImages(std::initializer_list<image_t> ids) {
  Reconstruction r;
  for (const image_t id : ids) r.AddImage(id, testing::DefaultIntrinsics(), {});
  return r;
}

// Straight scan over every pair, no index.
std::size_t CountByScan(const std::vector<MatchPair>& pairs,
                        const std::set<image_t>& src,
                        const std::set<image_t>& ref,
                        CorrespondenceStrategy strategy) {
  std::size_t n = 0;
  for (const auto& p : pairs) {
    const bool in_any_a = src.count(p.image_id_a) || ref.count(p.image_id_a);
    const bool in_any_b = src.count(p.image_id_b) || ref.count(p.image_id_b);
    bool take = true;
    if (strategy == CorrespondenceStrategy::kOnDemand) {
      take = (src.count(p.image_id_a) && ref.count(p.image_id_b)) ||
             (src.count(p.image_id_b) && ref.count(p.image_id_a));
    } else if (strategy == CorrespondenceStrategy::kPairwise) {
      take = in_any_a && in_any_b;
    }
    if (take) n += p.matches.size();
  }
  return n;
}

TEST(CorrespondenceGraph, NoCrossMatchesGivesEmptyGraph) {
  const auto store = StoreOf({{1, 2, {{0, 0}, {1, 1}}}, {3, 4, {{0, 0}}}});
  const auto graph =
      BuildCorrespondenceGraph(WithImages({1, 2}), WithImages({3, 4}), store);
  EXPECT_EQ(graph.NumKeys(), 0u);
  EXPECT_EQ(graph.loaded_match_count(), 0u);
  EXPECT_EQ(graph.Loaded().pairs, 0u);
}

TEST(CorrespondenceGraph, OnlySourceImagesAreUsed) {
  // Source i1..i4, reference r5..r8; pairs among the reference images and
  // to an unrelated image 9 must not be loaded.
  std::vector<MatchPair> pairs = {
      {1, 5, {{0, 0}, {1, 1}}}, {2, 6, {{0, 2}}},       {3, 7, {{4, 4}}},
      {4, 8, {{1, 3}}},         {5, 6, {{0, 0}}},       {6, 7, {{1, 1}}},
      {7, 8, {{2, 2}}},         {1, 2, {{3, 3}}},       {4, 9, {{0, 0}}},
      {8, 9, {{5, 5}}}};
  const auto store = StoreOf(pairs);
  const auto graph = BuildCorrespondenceGraph(WithImages({1, 2, 3, 4}),
                                              WithImages({5, 6, 7, 8}), store);
  EXPECT_EQ(graph.Loaded().pairs, 4u);
  EXPECT_EQ(graph.loaded_match_count(), 5u);
  EXPECT_EQ(graph.NumKeys(), 5u);
  EXPECT_EQ(graph.Links({1, 0}), (std::vector<ImageKeypoint>{{5, 0}}));
  EXPECT_EQ(graph.Links({2, 0}), (std::vector<ImageKeypoint>{{6, 2}}));
  EXPECT_TRUE(graph.Links({5, 0}).empty());
  EXPECT_TRUE(graph.Links({1, 3}).empty());
}

TEST(CorrespondenceGraph, SharedImageLinksKeypointToItself) {
  auto ring = testing::MakeRingDataset(6, 80, 0.0, 3);
  const auto src = testing::SubReconstruction(ring.truth, {1, 2, 3});
  const auto ref = testing::SubReconstruction(ring.truth, {3, 4, 5});
  const auto graph = BuildCorrespondenceGraph(
      src, ref, MatchStore(std::make_shared<const std::vector<MatchPair>>()));
  EXPECT_EQ(graph.loaded_match_count(), 0u);
  for (const auto& [id, point] : src.points) {
    for (const auto& obs : point.observations) {
      const auto& links = graph.Links({obs.image_id, obs.keypoint_idx});
      if (obs.image_id == 3) {
        EXPECT_EQ(links, (std::vector<ImageKeypoint>{{3, obs.keypoint_idx}}));
      } else {
        EXPECT_TRUE(links.empty());
      }
    }
  }
}

TEST(CorrespondenceGraph, StrategyCountsAreOrderedAndMatchScan) {
  auto ring = testing::MakeRingDataset(12, 400, 0.0, 5);
  const auto& pairs = ring.dataset.matches;
  const auto store = StoreOf(pairs);
  const std::vector<std::pair<std::set<image_t>, std::set<image_t>>> splits = {
      {{1, 2, 3}, {4, 5, 6, 7, 8}},
      {{1, 5}, {2, 3, 4, 6, 7, 8, 9, 10}},
      {{11, 12}, {1, 2, 3}},
      {{3, 4, 5}, {5, 6}},
  };
  bool strict = false;
  for (const auto& [src, ref] : splits) {
    const auto on_demand =
        CountLoadedMatches(src, ref, store, CorrespondenceStrategy::kOnDemand);
    const auto pairwise =
        CountLoadedMatches(src, ref, store, CorrespondenceStrategy::kPairwise);
    const auto all =
        CountLoadedMatches(src, ref, store, CorrespondenceStrategy::kAllDataset);
    EXPECT_EQ(on_demand.matches,
              CountByScan(pairs, src, ref, CorrespondenceStrategy::kOnDemand));
    EXPECT_EQ(pairwise.matches,
              CountByScan(pairs, src, ref, CorrespondenceStrategy::kPairwise));
    EXPECT_EQ(all.matches,
              CountByScan(pairs, src, ref, CorrespondenceStrategy::kAllDataset));
    EXPECT_LE(on_demand.matches, pairwise.matches);
    EXPECT_LE(pairwise.matches, all.matches);
    strict = strict || on_demand.matches < all.matches;

    const auto s = testing::SubReconstruction(ring.truth, src);
    const auto r = testing::SubReconstruction(ring.truth, ref);
    EXPECT_EQ(BuildCorrespondenceGraph(s, r, store).loaded_match_count(),
              on_demand.matches);
  }
  EXPECT_TRUE(strict);
}

TEST(CorrespondenceGraph, EveryStrategyFindsTheSameCommonPoints) {
  auto ring = testing::MakeRingDataset(10, 300, 0.0, 8);
  const auto store = StoreOf(ring.dataset.matches);
  const auto src = testing::SubReconstruction(ring.truth, {1, 2, 3});
  const auto ref = testing::SubReconstruction(ring.truth, {3, 4, 5, 6, 7});
  std::vector<std::vector<std::pair<point3D_t, point3D_t>>> results;
  for (const auto strategy :
       {CorrespondenceStrategy::kOnDemand, CorrespondenceStrategy::kPairwise,
        CorrespondenceStrategy::kAllDataset}) {
    const auto common =
        FindCommonPoints(BuildCorrespondenceGraph(src, ref, store, strategy), src, ref);
    std::vector<std::pair<point3D_t, point3D_t>> ids;
    for (const auto& p : common.pairs) ids.emplace_back(p.source_point, p.reference_point);
    results.push_back(ids);
  }
  EXPECT_FALSE(results[0].empty());
  EXPECT_EQ(results[0], results[1]);
  EXPECT_EQ(results[0], results[2]);
}

}  // namespace
}  // namespace psfm
