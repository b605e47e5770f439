#pragma once

#include <string>
#include <vector>

#include "psfm/geometry/bundle_adjustment.h"
#include "psfm/geometry/reconstruction.h"
#include "psfm/util/expected.h"

namespace psfm {

enum class GcpRole { kControl, kCheck };

struct GcpObservation {
  image_t image_id = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

struct GcpRecord {
  std::uint32_t gcp_id = 0;
  // Survey frame, meters.
  Eigen::Vector3d world = Eigen::Vector3d::Zero();
  std::vector<GcpObservation> observations;
  GcpRole role = GcpRole::kControl;
};

struct CheckPointResidual {
  std::uint32_t gcp_id = 0;
  // Model minus survey, per axis.
  Eigen::Vector3d delta = Eigen::Vector3d::Zero();
};

struct AxisStats {
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  // Sample standard deviation of |delta| (n - 1).
  Eigen::Vector3d std_dev = Eigen::Vector3d::Zero();
};

// Statistics of absolute residuals per axis.
AxisStats ComputeAxisStats(const std::vector<CheckPointResidual>& residuals);

struct GeoreferenceOptions {
  double min_tri_angle_deg = 1.0;
  BaOptions ba = [] {
    BaOptions o;
    o.max_iterations = 50;
    o.fix_gauge = false;
    return o;
  }();
};

struct GeoreferenceResult {
  Reconstruction model;
  std::vector<CheckPointResidual> check_residuals;
  AxisStats stats;
  std::size_t num_controls = 0;
  BaReport ba;
};

// Triangulates the GCPs in the model frame, aligns the model to the survey
// frame on the control points, then adjusts it with the control points held
// at their survey coordinates. Check points are re-triangulated in the
// result and compared to the survey. Fewer than three triangulable,
// non-collinear controls is an error.
Expected<GeoreferenceResult> Georeference(const Reconstruction& model,
                                          const std::vector<GcpRecord>& gcps,
                                          const GeoreferenceOptions& options = {});

// Max / mean / std of |X| |Y| |Z| in meters, one row.
std::string FormatResidualTable(const GeoreferenceResult& result,
                                const std::string& method = "psfm");

}  // namespace psfm
