#include "psfm/merge/merger.h"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

#include "psfm/util/parallel.h"

namespace psfm {
namespace {

struct Candidate {
  // Pairs oriented cluster -> merged model.
  CommonPointSet common;
  bool cluster_is_source = true;
};

CommonPointSet Swapped(const CommonPointSet& set) {
  CommonPointSet out;
  out.pairs.reserve(set.size());
  for (const auto& p : set.pairs) {
    out.pairs.push_back({p.reference_point, p.source_point, p.support, p.l, p.m});
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const CommonPointPair& a, const CommonPointPair& b) {
              return std::tie(a.source_point, a.reference_point) <
                     std::tie(b.source_point, b.reference_point);
            });
  return out;
}

// The smaller model plays the source role.
Candidate CommonWithModel(const Reconstruction& model,
                          const Reconstruction& cluster,
                          const MatchStore& store) {
  Candidate c;
  c.cluster_is_source = cluster.NumImages() <= model.NumImages();
  if (c.cluster_is_source) {
    c.common = FindCommonPoints(BuildCorrespondenceGraph(cluster, model, store),
                                cluster, model);
  } else {
    c.common = Swapped(FindCommonPoints(
        BuildCorrespondenceGraph(model, cluster, store), model, cluster));
  }
  return c;
}

}  // namespace

Reconstruction MergePair(const Reconstruction& global_model,
                         const Reconstruction& cluster,
                         const SimilarityTransform& cluster_to_global,
                         const std::vector<CommonPointPair>& inlier_pairs) {
  Reconstruction merged = global_model;
  for (const image_t id : cluster.registered_order) {
    if (merged.HasImage(id)) continue;
    const auto& image = cluster.images.at(id);
    merged.AddImage(id, image.intrinsics,
                    cluster_to_global.ApplyToPose(image.pose));
  }

  std::map<point3D_t, point3D_t> fuse_into;
  for (const auto& p : inlier_pairs) fuse_into[p.source_point] = p.reference_point;
  auto used = merged.BuildObservationIndex();
  const auto keypoint_free = [&](const Observation& obs) {
    return obs.keypoint_idx == kNoKeypoint ||
           !used.count({obs.image_id, obs.keypoint_idx});
  };
  const auto claim = [&](const Observation& obs, point3D_t id) {
    if (obs.keypoint_idx != kNoKeypoint) {
      used[{obs.image_id, obs.keypoint_idx}] = id;
    }
  };

  for (const auto& [cluster_id, point] : cluster.points) {
    const auto target = fuse_into.find(cluster_id);
    if (target != fuse_into.end()) {
      ScenePoint& global_point = merged.points.at(target->second);
      for (const auto& obs : point.observations) {
        if (global_point.FindObservation(obs.image_id) || !keypoint_free(obs)) {
          continue;
        }
        global_point.observations.push_back(obs);
        claim(obs, target->second);
      }
      continue;
    }
    std::vector<Observation> kept;
    for (const auto& obs : point.observations) {
      if (keypoint_free(obs)) kept.push_back(obs);
    }
    if (kept.size() < 2) continue;
    const point3D_t id =
        merged.AddPoint(cluster_to_global.Apply(point.xyz), kept);
    for (const auto& obs : kept) claim(obs, id);
  }
  return merged;
}

Reconstruction MergeAll(const Reconstruction& global_model,
                        const std::vector<Reconstruction>& clusters,
                        const MatchStore& store, const MergeOptions& options,
                        MergeReport* report) {
  if (global_model.NumImages() == 0) {
    throw std::invalid_argument("MergeAll: empty global model");
  }
  MergeReport local;
  MergeReport& rep = report ? *report : local;
  rep = MergeReport{};

  Reconstruction model = global_model;
  std::vector<std::size_t> remaining;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i].NumImages() > 0) {
      remaining.push_back(i);
    } else {
      rep.dropped.push_back(i);
      rep.dropped_common_points[i] = 0;
    }
  }

  while (!remaining.empty()) {
    // Count against a frozen snapshot of the merged model.
    std::vector<Candidate> candidates(remaining.size());
    ParallelFor(remaining.size(), options.num_workers, [&](std::size_t k) {
      candidates[k] = CommonWithModel(model, clusters[remaining[k]], store);
    });
    std::vector<std::size_t> order(remaining.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (candidates[x].common.size() != candidates[y].common.size()) {
        return candidates[x].common.size() > candidates[y].common.size();
      }
      return remaining[x] < remaining[y];
    });

    bool merged_one = false;
    for (const std::size_t k : order) {
      const std::size_t index = remaining[k];
      const Reconstruction& cluster = clusters[index];
      const CommonPointSet& common = candidates[k].common;
      SimilarityRansacOptions ransac = options.ransac;
      ransac.seed = options.ransac.seed + 7919 * rep.steps.size() + index;
      const auto fit = EstimateSimilarityRansac(common, cluster, model, ransac);
      if (!fit.ok()) {
        ++rep.failed_attempts;
        continue;
      }

      MergeStep step;
      step.cluster_index = index;
      step.common_points = common.size();
      step.num_inliers = fit->num_inliers;
      step.inlier_ratio = fit->inlier_ratio;
      step.mse = fit->mse;
      for (std::size_t j = 0; j < remaining.size(); ++j) {
        step.candidate_counts[remaining[j]] = candidates[j].common.size();
      }
      const std::set<image_t> cluster_images = RegisteredImageSet(cluster);
      const std::set<image_t> model_images = RegisteredImageSet(model);
      const auto& src = candidates[k].cluster_is_source ? cluster_images : model_images;
      const auto& ref = candidates[k].cluster_is_source ? model_images : cluster_images;
      step.on_demand = CountLoadedMatches(src, ref, store,
                                          CorrespondenceStrategy::kOnDemand);
      step.pairwise = CountLoadedMatches(src, ref, store,
                                         CorrespondenceStrategy::kPairwise);
      step.all_dataset = CountLoadedMatches(src, ref, store,
                                            CorrespondenceStrategy::kAllDataset);

      std::vector<CommonPointPair> inliers;
      std::set<point3D_t> fused;
      for (std::size_t i = 0; i < common.size(); ++i) {
        if (!fit->inlier_mask[i]) continue;
        inliers.push_back(common.pairs[i]);
        fused.insert(common.pairs[i].reference_point);
      }
      const std::size_t images_before = model.NumImages();
      model = MergePair(model, cluster, fit->transform, inliers);
      step.images_added = model.NumImages() - images_before;
      step.points_fused = fused.size();
      rep.steps.push_back(std::move(step));
      remaining.erase(remaining.begin() + k);
      merged_one = true;
      break;
    }
    if (!merged_one) {
      for (std::size_t k = 0; k < remaining.size(); ++k) {
        rep.dropped.push_back(remaining[k]);
        rep.dropped_common_points[remaining[k]] = candidates[k].common.size();
      }
      std::sort(rep.dropped.begin(), rep.dropped.end());
      remaining.clear();
    }
  }

  rep.pruned_observations = model.FilterObservations(options.max_reproj_error_px);
  rep.mean_error_before_ba = model.MeanReprojectionError();
  rep.mean_error_after_ba = rep.mean_error_before_ba;
  if (options.run_final_ba && model.NumPoints() > 0) {
    rep.final_ba = BundleAdjust(model, options.final_ba);
    rep.mean_error_after_ba = model.MeanReprojectionError();
  }
  return model;
}

}  // namespace psfm
