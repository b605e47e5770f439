#pragma once

#include <map>
#include <vector>

#include "psfm/geometry/bundle_adjustment.h"
#include "psfm/merge/similarity_ransac.h"

namespace psfm {

// Maps `cluster` into the frame of `global_model` with `cluster_to_global`.
// Common points fuse into the global point (global position kept,
// observations of new images appended). Other cluster points get fresh ids.
// Images already in the global model keep their global pose. Observations
// whose keypoint already backs another global point are dropped, and new
// points left with fewer than two observations are discarded.
Reconstruction MergePair(const Reconstruction& global_model,
                         const Reconstruction& cluster,
                         const SimilarityTransform& cluster_to_global,
                         const std::vector<CommonPointPair>& inlier_pairs);

struct MergeOptions {
  SimilarityRansacOptions ransac;
  // Observations above this error are pruned before the final BA.
  double max_reproj_error_px = 4.0;
  BaOptions final_ba = [] {
    BaOptions o;
    o.max_iterations = 50;
    return o;
  }();
  bool run_final_ba = true;
  // Threads for common-point counting against the frozen merged model.
  int num_workers = 1;
};

struct MergeStep {
  std::size_t cluster_index = 0;
  std::size_t common_points = 0;
  std::size_t num_inliers = 0;
  double inlier_ratio = 0;
  double mse = 0;
  std::size_t images_added = 0;
  std::size_t points_fused = 0;
  // Common-point counts of every cluster still waiting at decision time.
  std::map<std::size_t, std::size_t> candidate_counts;
  // Match records each strategy needs for this step.
  LoadedMatches on_demand;
  LoadedMatches pairwise;
  LoadedMatches all_dataset;
};

struct MergeReport {
  std::vector<MergeStep> steps;
  // Clusters that never merged, with their last common-point count.
  std::vector<std::size_t> dropped;
  std::map<std::size_t, std::size_t> dropped_common_points;
  std::size_t failed_attempts = 0;
  std::size_t pruned_observations = 0;
  double mean_error_before_ba = 0;
  double mean_error_after_ba = 0;
  BaReport final_ba;
};

// Merges clusters into the global model one at a time, always the cluster
// with most common points (ties to the lower index). A failed RANSAC moves
// on to the next candidate; clusters are dropped only when every remaining
// one fails in a full pass. Ends with outlier pruning and a global BA.
Reconstruction MergeAll(const Reconstruction& global_model,
                        const std::vector<Reconstruction>& clusters,
                        const MatchStore& store, const MergeOptions& options,
                        MergeReport* report = nullptr);

}  // namespace psfm
