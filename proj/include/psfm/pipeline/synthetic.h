#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "psfm/geometry/reconstruction.h"
#include "psfm/matchgraph/dataset.h"
#include "psfm/merge/georeference.h"

namespace psfm {

enum class CameraPattern {
  // Serpentine grid of downward-looking cameras.
  kNadir,
  // Grid of rig stations, each a nadir view plus four views tilted by
  // rig_tilt_deg forward, backward, left and right.
  kOblique,
  // Ring of cameras looking at the scene centre.
  kOrbit,
};

const char* CameraPatternName(CameraPattern pattern);
// Throws std::invalid_argument on an unknown name.
CameraPattern ParseCameraPattern(const std::string& name);

struct SyntheticConfig {
  CameraPattern pattern = CameraPattern::kNadir;
  int image_count = 40;
  int point_count = 1500;
  int building_count = 6;
  // Pixel noise on every keypoint and GCP observation.
  double noise_px = 0.0;
  // Fraction of precomputed matches replaced by wrong keypoints.
  double outlier_rate = 0.0;
  // Extra keypoints per image with no 3D point, as a fraction of the
  // observed ones.
  double distractor_ratio = 0.1;
  int gcp_count = 0;
  int control_count = 3;
  std::uint64_t seed = 0;

  double altitude_m = 100.0;
  double overlap = 0.7;
  double rig_tilt_deg = 45.0;
  double focal_px = 1000.0;
  int image_width = 1200;
  int image_height = 900;
  int descriptor_dim = 32;
  // Per-component Gaussian noise on a point's descriptor in each view.
  double descriptor_noise = 0.03;
  // Pairs sharing fewer points get no precomputed matches.
  int min_shared_for_matches = 8;
};

// 120 nadir images at 80% overlap, 4000 points, 0.4 px noise, 10 GCPs of
// which 3 control.
SyntheticConfig StandardSyntheticConfig();

struct SyntheticScene {
  // Keypoints, descriptors and precomputed matches.
  Dataset dataset;
  // Generating cameras and points; observations reference dataset keypoints.
  Reconstruction truth;
  std::vector<GcpRecord> gcps;
  // 0 for nadir views, 1-4 for the tilted rig views, -1 for orbit.
  std::map<image_t, int> rig_view;
};

// Deterministic for a given config.
SyntheticScene GenerateSynthetic(const SyntheticConfig& config);

// dataset.txt (no matches), matches.txt, truth.txt and gcps.txt.
void WriteSynthetic(const SyntheticScene& scene, const std::string& directory);

}  // namespace psfm
