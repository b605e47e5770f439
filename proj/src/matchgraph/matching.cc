#include "psfm/matchgraph/matching.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <stdexcept>

#include "psfm/util/parallel.h"

namespace psfm {
namespace {

struct TwoNearest {
  long best = -1;
  float d1 = std::numeric_limits<float>::infinity();
  float d2 = std::numeric_limits<float>::infinity();
};

// Row-wise two nearest columns of a squared distance matrix.
std::vector<TwoNearest> NearestPerRow(const Eigen::MatrixXf& dist2) {
  std::vector<TwoNearest> out(dist2.rows());
  for (long i = 0; i < dist2.rows(); ++i) {
    auto& nn = out[i];
    for (long j = 0; j < dist2.cols(); ++j) {
      const float d = dist2(i, j);
      if (d < nn.d1) {
        nn.d2 = nn.d1;
        nn.d1 = d;
        nn.best = j;
      } else if (d < nn.d2) {
        nn.d2 = d;
      }
    }
  }
  return out;
}

bool PassesRatio(const TwoNearest& nn, double ratio) {
  if (nn.best < 0) return false;
  if (!std::isfinite(nn.d2)) return true;  // single candidate
  const double d1 = std::sqrt(std::max(0.0f, nn.d1));
  const double d2 = std::sqrt(std::max(0.0f, nn.d2));
  return d1 < ratio * d2;
}

}  // namespace

std::vector<FeatureMatch> MatchDescriptors(const DescriptorMatrix& a,
                                           const DescriptorMatrix& b,
                                           double ratio) {
  if (a.rows() == 0 || b.rows() == 0) return {};
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("descriptor dimensions differ");
  }
  const Eigen::VectorXf na = a.rowwise().squaredNorm();
  const Eigen::VectorXf nb = b.rowwise().squaredNorm();
  Eigen::MatrixXf dist2 = -2.0f * (a * b.transpose());
  dist2.colwise() += na;
  dist2.rowwise() += nb.transpose();

  const auto ab = NearestPerRow(dist2);
  const auto ba = NearestPerRow(dist2.transpose());
  std::vector<FeatureMatch> matches;
  for (long i = 0; i < a.rows(); ++i) {
    const long j = ab[i].best;
    if (j < 0 || ba[j].best != i) continue;
    if (!PassesRatio(ab[i], ratio) || !PassesRatio(ba[j], ratio)) continue;
    matches.push_back(
        {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  }
  return matches;
}

std::optional<MatchPair> VerifyMatches(const MatchPair& pair,
                                       const Dataset& dataset,
                                       const MatchingOptions& options) {
  if (pair.matches.size() < 8 ||
      pair.matches.size() < static_cast<std::size_t>(options.min_inliers)) {
    return std::nullopt;
  }
  const auto& kps_a = dataset.features.at(pair.image_id_a).keypoints;
  const auto& kps_b = dataset.features.at(pair.image_id_b).keypoints;
  std::vector<Eigen::Vector2d> pa, pb;
  pa.reserve(pair.matches.size());
  pb.reserve(pair.matches.size());
  for (const auto& m : pair.matches) {
    pa.push_back(kps_a.at(m.idx_a).xy);
    pb.push_back(kps_b.at(m.idx_b).xy);
  }
  const auto pose =
      EstimateRelativePose(pa, pb, dataset.IntrinsicsFor(pair.image_id_a),
                           dataset.IntrinsicsFor(pair.image_id_b), options.pose);
  if (!pose.ok() ||
      pose->num_inliers < static_cast<std::size_t>(options.min_inliers)) {
    return std::nullopt;
  }
  MatchPair out;
  out.image_id_a = pair.image_id_a;
  out.image_id_b = pair.image_id_b;
  for (std::size_t i = 0; i < pair.matches.size(); ++i) {
    if (pose->inlier_mask[i]) out.matches.push_back(pair.matches[i]);
  }
  return out;
}

std::optional<MatchPair> VerifyPair(image_t image_a, image_t image_b,
                                    const Dataset& dataset,
                                    const MatchingOptions& options) {
  MatchPair putative;
  putative.image_id_a = image_a;
  putative.image_id_b = image_b;
  const auto fa = dataset.features.find(image_a);
  const auto fb = dataset.features.find(image_b);
  if (fa == dataset.features.end() || fb == dataset.features.end() ||
      !fa->second.HasDescriptors() || !fb->second.HasDescriptors()) {
    throw std::invalid_argument("verification needs descriptors");
  }
  putative.matches = MatchDescriptors(fa->second.descriptors,
                                      fb->second.descriptors, options.ratio);
  CanonicalizePair(&putative);
  return VerifyMatches(putative, dataset, options);
}

std::vector<MatchPair> VerifyCandidates(
    const std::vector<CandidatePair>& candidates, const Dataset& dataset,
    const MatchingOptions& options) {
  std::vector<std::optional<MatchPair>> results(candidates.size());
  ParallelFor(candidates.size(), options.num_workers, [&](std::size_t i) {
    MatchingOptions local = options;
    local.pose.seed = options.pose.seed + i;
    results[i] = VerifyPair(candidates[i].image_id_a, candidates[i].image_id_b,
                            dataset, local);
  });
  std::vector<MatchPair> out;
  for (auto& r : results) {
    if (r) out.push_back(std::move(*r));
  }
  std::sort(out.begin(), out.end(), [](const MatchPair& x, const MatchPair& y) {
    return std::tie(x.image_id_a, x.image_id_b) <
           std::tie(y.image_id_a, y.image_id_b);
  });
  return out;
}

}  // namespace psfm
