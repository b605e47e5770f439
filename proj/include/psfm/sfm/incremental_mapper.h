#pragma once

#include <string>
#include <vector>

#include "psfm/geometry/bundle_adjustment.h"
#include "psfm/geometry/reconstruction.h"
#include "psfm/geometry/resection.h"
#include "psfm/matchgraph/dataset.h"
#include "psfm/sfm/seed.h"
#include "psfm/util/expected.h"

namespace psfm {

struct MapperOptions {
  SeedOptions seed;
  // An image is a registration candidate once this many of its keypoints
  // belong to triangulated tracks.
  std::size_t min_resection_corrs = 15;
  // Reprojection threshold for resection, triangulation and pruning.
  double max_reproj_error_px = 4.0;
  double min_tri_angle_deg = 2.0;
  // Global BA once the registered count reaches growth_ratio times the
  // count at the previous global BA.
  double growth_ratio = 1.1;
  ResectionOptions resection;
  BaOptions local_ba = [] {
    BaOptions o;
    o.max_iterations = 10;
    return o;
  }();
  BaOptions global_ba = [] {
    BaOptions o;
    o.max_iterations = 50;
    return o;
  }();
  std::uint64_t rng_seed = 0;
};

struct MapperReport {
  SeedResult seed;
  std::vector<image_t> registered_order;
  std::vector<image_t> unregistered;
  std::size_t num_global_ba = 0;
  std::size_t num_local_ba = 0;
  std::size_t num_failed_resections = 0;
  double initial_global_cost = 0;
  double final_global_cost = 0;
};

// Incremental reconstruction of `subset` from the match pairs with both
// images in the subset. Registration failures skip the image; only a seed
// failure is an error.
Expected<Reconstruction> IncrementalReconstruct(
    const std::vector<image_t>& subset, const Dataset& dataset,
    const std::vector<MatchPair>& pairs, const MapperOptions& options,
    MapperReport* report = nullptr);

}  // namespace psfm
