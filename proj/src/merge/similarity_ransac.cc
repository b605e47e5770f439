#include "psfm/merge/similarity_ransac.h"

#include <cmath>
#include <limits>

#include "psfm/util/random.h"

namespace psfm {
namespace {

struct View {
  const CameraIntrinsics* intrinsics;
  const CameraPose* pose;
  Eigen::Vector2d xy;
};

// Everything the residual of one pair needs, gathered once per RANSAC run.
struct PairViews {
  Point3 source_xyz;
  Point3 reference_xyz;
  std::vector<View> reference_views;
  std::vector<View> source_views;
};

std::vector<View> ViewsOf(const ScenePoint& point, const Reconstruction& recon) {
  std::vector<View> views;
  views.reserve(point.observations.size());
  for (const auto& obs : point.observations) {
    const auto& image = recon.images.at(obs.image_id);
    views.push_back({&image.intrinsics, &image.pose, obs.xy});
  }
  return views;
}

PairViews GatherViews(const CommonPointPair& pair, const Reconstruction& source,
                      const Reconstruction& reference) {
  const ScenePoint& s = source.points.at(pair.source_point);
  const ScenePoint& r = reference.points.at(pair.reference_point);
  return {s.xyz, r.xyz, ViewsOf(r, reference), ViewsOf(s, source)};
}

// Sum of squared errors, stopping early once it exceeds `limit`.
double SumSquared(const std::vector<View>& views, const Point3& x,
                  double limit) {
  double sum = 0;
  for (const auto& v : views) {
    const auto e = SquaredReprojectionError(*v.intrinsics, *v.pose, x, v.xy);
    if (!e) return std::numeric_limits<double>::infinity();
    sum += *e;
    if (sum > limit) return sum;
  }
  return sum;
}

double Residual(const PairViews& pv, const SimilarityTransform& forward,
                const SimilarityTransform& backward,
                double limit = std::numeric_limits<double>::infinity()) {
  const double n = static_cast<double>(pv.reference_views.size() +
                                       pv.source_views.size());
  if (n == 0) return std::numeric_limits<double>::infinity();
  const double sum_limit = limit * limit * n;
  double sum = SumSquared(pv.reference_views, forward.Apply(pv.source_xyz),
                          sum_limit);
  if (sum <= sum_limit) {
    sum += SumSquared(pv.source_views, backward.Apply(pv.reference_xyz),
                      sum_limit - sum);
  }
  return std::sqrt(sum / n);
}

std::size_t Classify(const std::vector<PairViews>& views,
                     const SimilarityTransform& transform, double threshold,
                     std::vector<char>* mask) {
  const SimilarityTransform inverse = transform.Inverse();
  mask->assign(views.size(), 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (Residual(views[i], transform, inverse, threshold) <= threshold) {
      (*mask)[i] = 1;
      ++count;
    }
  }
  return count;
}

Expected<SimilarityEstimate> FitOn(const std::vector<PairViews>& views,
                                   const std::vector<char>& mask) {
  std::vector<Point3> src, dst;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (!mask[i]) continue;
    src.push_back(views[i].source_xyz);
    dst.push_back(views[i].reference_xyz);
  }
  return EstimateSimilarityUmeyama(src, dst);
}

}  // namespace

double TransformResidual(const CommonPointPair& pair,
                         const SimilarityTransform& source_to_reference,
                         const Reconstruction& source,
                         const Reconstruction& reference) {
  return Residual(GatherViews(pair, source, reference), source_to_reference,
                  source_to_reference.Inverse());
}

Expected<SimilarityRansacResult> EstimateSimilarityRansac(
    const CommonPointSet& common, const Reconstruction& source,
    const Reconstruction& reference, const SimilarityRansacOptions& options) {
  const std::size_t n = common.size();
  if (n < 3) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "similarity RANSAC needs at least 3 common points, got " +
                         std::to_string(n));
  }
  std::vector<PairViews> views;
  views.reserve(n);
  for (const auto& pair : common.pairs) {
    views.push_back(GatherViews(pair, source, reference));
  }

  Rng rng(options.seed);
  SimilarityRansacResult best;
  std::vector<char> mask;
  std::size_t required = options.max_iterations;
  std::size_t it = 0;
  for (; it < required; ++it) {
    const auto sample = SampleDistinct(n, 3, rng);
    Point3 src[3], dst[3];
    for (int k = 0; k < 3; ++k) {
      src[k] = views[sample[k]].source_xyz;
      dst[k] = views[sample[k]].reference_xyz;
    }
    const auto model = EstimateSimilarityUmeyama(src, dst);
    if (!model.ok()) continue;
    const std::size_t count =
        Classify(views, model->transform, options.threshold_px, &mask);
    if (count > best.num_inliers) {
      best.num_inliers = count;
      best.transform = model->transform;
      best.inlier_mask = mask;
      required = std::min(
          required,
          RequiredRansacIterations(static_cast<double>(count) / n, 3,
                                   options.confidence, options.max_iterations));
    }
  }
  best.iterations = it;

  const auto fails = [&](std::size_t count) {
    return count < 3 ||
           static_cast<double>(count) / n < options.min_inlier_ratio;
  };
  if (fails(best.num_inliers)) {
    return MakeError(ErrorCode::kNoConsensus,
                     "similarity RANSAC: " + std::to_string(best.num_inliers) +
                         " of " + std::to_string(n) + " pairs agree");
  }

  // Re-estimate on the consensus set, repeating while it keeps growing.
  for (int round = 0; round < 5; ++round) {
    const auto refit = FitOn(views, best.inlier_mask);
    if (!refit.ok()) break;
    const std::size_t count =
        Classify(views, refit->transform, options.threshold_px, &mask);
    if (round > 0 && count < best.num_inliers) break;
    if (fails(count)) break;
    const bool grew = round == 0 || count > best.num_inliers;
    best.transform = refit->transform;
    best.num_inliers = count;
    best.inlier_mask = mask;
    if (!grew) break;
  }
  best.inlier_ratio = static_cast<double>(best.num_inliers) / n;
  {
    std::vector<Point3> src, dst;
    for (std::size_t i = 0; i < n; ++i) {
      if (!best.inlier_mask[i]) continue;
      src.push_back(views[i].source_xyz);
      dst.push_back(views[i].reference_xyz);
    }
    best.mse = SimilarityMse(best.transform, src, dst);
  }
  return best;
}

}  // namespace psfm
