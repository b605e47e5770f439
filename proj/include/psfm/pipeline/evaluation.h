#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "psfm/geometry/reconstruction.h"

namespace psfm {

struct EvalMetrics {
  // Wall time per stage in seconds.
  std::map<std::string, double> stage_seconds;
  double mean_reprojection_error = 0;
  std::size_t registered_images = 0;
  std::size_t num_points = 0;
  std::size_t num_observations = 0;
  // Filled when at least three cameras are shared with the ground truth.
  bool aligned = false;
  std::size_t aligned_cameras = 0;
  // Camera centre RMSE after similarity alignment, ground-truth units.
  double position_rmse = 0;
  double rotation_error_mean_deg = 0;
  double rotation_error_max_deg = 0;
};

// Aligns camera centres onto the ground truth and measures poses there.
EvalMetrics Evaluate(const Reconstruction& recon, const Reconstruction& truth);
// Counts and reprojection error only.
EvalMetrics Evaluate(const Reconstruction& recon);

nlohmann::json ToJson(const EvalMetrics& metrics);

}  // namespace psfm
