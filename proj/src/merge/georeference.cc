#include "psfm/merge/georeference.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

#include "psfm/geometry/similarity.h"
#include "psfm/geometry/triangulation.h"

namespace psfm {
namespace {

std::optional<Point3> TriangulateGcp(const GcpRecord& gcp,
                                     const Reconstruction& model,
                                     double min_tri_angle_deg) {
  std::vector<TriangulationObservation> obs;
  for (const auto& o : gcp.observations) {
    const auto it = model.images.find(o.image_id);
    if (it == model.images.end()) continue;
    obs.push_back({it->second.intrinsics, it->second.pose, o.pixel});
  }
  if (obs.size() < 2) return std::nullopt;
  TriangulationOptions options;
  options.min_tri_angle_deg = min_tri_angle_deg;
  const auto x = TriangulatePoint(obs, options);
  if (!x.ok()) return std::nullopt;
  return *x;
}

}  // namespace

AxisStats ComputeAxisStats(const std::vector<CheckPointResidual>& residuals) {
  AxisStats stats;
  if (residuals.empty()) return stats;
  const double n = static_cast<double>(residuals.size());
  for (const auto& r : residuals) {
    const Eigen::Vector3d a = r.delta.cwiseAbs();
    stats.max = stats.max.cwiseMax(a);
    stats.mean += a / n;
  }
  if (residuals.size() > 1) {
    for (const auto& r : residuals) {
      const Eigen::Vector3d d = r.delta.cwiseAbs() - stats.mean;
      stats.std_dev += d.cwiseProduct(d) / (n - 1);
    }
    stats.std_dev = stats.std_dev.cwiseSqrt();
  }
  return stats;
}

Expected<GeoreferenceResult> Georeference(const Reconstruction& model,
                                          const std::vector<GcpRecord>& gcps,
                                          const GeoreferenceOptions& options) {
  std::vector<const GcpRecord*> controls;
  std::vector<Point3> model_xyz, survey_xyz;
  for (const auto& gcp : gcps) {
    if (gcp.role != GcpRole::kControl) continue;
    const auto x = TriangulateGcp(gcp, model, options.min_tri_angle_deg);
    if (!x) continue;
    controls.push_back(&gcp);
    model_xyz.push_back(*x);
    survey_xyz.push_back(gcp.world);
  }
  if (controls.size() < 3) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "georeferencing needs 3 triangulable control points, got " +
                         std::to_string(controls.size()));
  }
  const auto alignment = EstimateSimilarityUmeyama(model_xyz, survey_xyz);
  if (!alignment.ok()) {
    return MakeError(ErrorCode::kDegenerate,
                     "control points are collinear: " + alignment.error().message);
  }

  GeoreferenceResult result;
  result.model = model;
  result.model.ApplySimilarity(alignment->transform);
  result.num_controls = controls.size();

  BaOptions ba = options.ba;
  std::vector<point3D_t> gcp_points;
  for (const GcpRecord* gcp : controls) {
    std::vector<Observation> obs;
    for (const auto& o : gcp->observations) {
      if (result.model.HasImage(o.image_id)) {
        obs.push_back({o.image_id, kNoKeypoint, o.pixel});
      }
    }
    const point3D_t id = result.model.AddPoint(gcp->world, std::move(obs));
    ba.fixed_point_ids.insert(id);
    gcp_points.push_back(id);
  }
  result.ba = BundleAdjust(result.model, ba);
  for (const point3D_t id : gcp_points) result.model.DeletePoint(id);

  for (const auto& gcp : gcps) {
    if (gcp.role != GcpRole::kCheck) continue;
    const auto x = TriangulateGcp(gcp, result.model, options.min_tri_angle_deg);
    if (!x) continue;
    result.check_residuals.push_back({gcp.gcp_id, *x - gcp.world});
  }
  result.stats = ComputeAxisStats(result.check_residuals);
  return result;
}

std::string FormatResidualTable(const GeoreferenceResult& result,
                                const std::string& method) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-12s %-26s %-26s %-26s\n", "Method",
                "Max (m)", "Mean (m)", "Std.dev. (m)");
  out += line;
  std::snprintf(line, sizeof(line),
                "%-12s %-8s %-8s %-8s %-8s %-8s %-8s %-8s %-8s %-8s\n", "",
                "|X|", "|Y|", "|Z|", "|X|", "|Y|", "|Z|", "|X|", "|Y|", "|Z|");
  out += line;
  const AxisStats& s = result.stats;
  std::snprintf(line, sizeof(line),
                "%-12s %-8.3f %-8.3f %-8.3f %-8.3f %-8.3f %-8.3f %-8.3f %-8.3f "
                "%-8.3f\n",
                method.c_str(), s.max.x(), s.max.y(), s.max.z(), s.mean.x(),
                s.mean.y(), s.mean.z(), s.std_dev.x(), s.std_dev.y(),
                s.std_dev.z());
  out += line;
  return out;
}

}  // namespace psfm
