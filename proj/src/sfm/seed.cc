#include "psfm/sfm/seed.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <tuple>

namespace psfm {
namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

struct Candidate {
  SeedResult seed;
  bool valid = false;
};

}  // namespace

double MedianTriangulationAngle(const MatchPair& pair, const Dataset& dataset,
                                const CameraPose& relative_pose,
                                const std::vector<char>& inlier_mask,
                                const TriangulationOptions& options) {
  const auto& kps_a = dataset.features.at(pair.image_id_a).keypoints;
  const auto& kps_b = dataset.features.at(pair.image_id_b).keypoints;
  const auto intr_a = dataset.IntrinsicsFor(pair.image_id_a);
  const auto intr_b = dataset.IntrinsicsFor(pair.image_id_b);
  const CameraPose pose_a;
  const Eigen::Vector3d center_a = pose_a.Center();
  const Eigen::Vector3d center_b = relative_pose.Center();
  std::vector<double> angles;
  for (std::size_t i = 0; i < pair.matches.size(); ++i) {
    if (!inlier_mask[i]) continue;
    const TriangulationObservation obs[2] = {
        {intr_a, pose_a, kps_a[pair.matches[i].idx_a].xy},
        {intr_b, relative_pose, kps_b[pair.matches[i].idx_b].xy}};
    const auto x = TriangulatePoint(obs, options);
    if (!x.ok()) continue;
    angles.push_back(TriangulationAngle(center_a, center_b, *x) * kRadToDeg);
  }
  if (angles.empty()) return 0;
  const auto mid = angles.begin() + angles.size() / 2;
  std::nth_element(angles.begin(), mid, angles.end());
  return *mid;
}

Expected<SeedResult> SelectSeedPair(const std::vector<MatchPair>& pairs,
                                    const Dataset& dataset,
                                    const SeedOptions& options) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = pairs[x];
    const auto& b = pairs[y];
    if (a.InlierCount() != b.InlierCount()) {
      return a.InlierCount() > b.InlierCount();
    }
    return std::tie(a.image_id_a, a.image_id_b) <
           std::tie(b.image_id_a, b.image_id_b);
  });

  std::optional<SeedResult> fallback;
  std::size_t tried = 0;
  for (const std::size_t index : order) {
    if (tried >= options.max_candidates) break;
    const auto& pair = pairs[index];
    if (pair.InlierCount() < std::max<std::size_t>(8, options.min_inliers)) {
      break;
    }
    ++tried;
    const auto& kps_a = dataset.features.at(pair.image_id_a).keypoints;
    const auto& kps_b = dataset.features.at(pair.image_id_b).keypoints;
    std::vector<Eigen::Vector2d> pa, pb;
    for (const auto& m : pair.matches) {
      pa.push_back(kps_a.at(m.idx_a).xy);
      pb.push_back(kps_b.at(m.idx_b).xy);
    }
    RelativePoseOptions pose_options = options.pose;
    pose_options.seed = options.pose.seed + index;
    const auto rel = EstimateRelativePose(
        pa, pb, dataset.IntrinsicsFor(pair.image_id_a),
        dataset.IntrinsicsFor(pair.image_id_b), pose_options);
    if (!rel.ok() || rel->num_inliers < options.min_inliers) continue;

    SeedResult seed;
    seed.image_a = pair.image_id_a;
    seed.image_b = pair.image_id_b;
    seed.relative_pose = rel->pose;
    for (std::size_t i = 0; i < pair.matches.size(); ++i) {
      if (rel->inlier_mask[i]) seed.inliers.push_back(pair.matches[i]);
    }
    seed.median_angle_deg = MedianTriangulationAngle(
        pair, dataset, rel->pose, rel->inlier_mask, options.triangulation);
    if (seed.median_angle_deg >= options.min_median_angle_deg) return seed;
    if (!fallback) {
      fallback = seed;
      fallback->fallback = true;
    }
  }
  if (fallback) return *fallback;
  return MakeError(ErrorCode::kNoConsensus,
                   "no image pair yields a relative pose");
}

}  // namespace psfm
