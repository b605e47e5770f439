#include "psfm/pipeline/evaluation.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "psfm/geometry/similarity.h"

namespace psfm {

EvalMetrics Evaluate(const Reconstruction& recon) {
  EvalMetrics m;
  m.registered_images = recon.NumImages();
  m.num_points = recon.NumPoints();
  m.num_observations = recon.NumObservations();
  m.mean_reprojection_error = recon.NumPoints() ? recon.MeanReprojectionError() : 0.0;
  return m;
}

EvalMetrics Evaluate(const Reconstruction& recon, const Reconstruction& truth) {
  EvalMetrics m = Evaluate(recon);
  std::vector<image_t> shared;
  std::vector<Point3> src, dst;
  for (const auto& [id, image] : recon.images) {
    const auto it = truth.images.find(id);
    if (it == truth.images.end()) continue;
    shared.push_back(id);
    src.push_back(image.pose.Center());
    dst.push_back(it->second.pose.Center());
  }
  if (shared.size() < 3) return m;
  const auto sim = EstimateSimilarityUmeyama(src, dst);
  if (!sim.ok()) return m;
  m.aligned = true;
  m.aligned_cameras = shared.size();
  double sq = 0, rot_sum = 0;
  for (const image_t id : shared) {
    const CameraPose aligned = sim->transform.ApplyToPose(recon.images.at(id).pose);
    const CameraPose& gt = truth.images.at(id).pose;
    sq += (aligned.Center() - gt.Center()).squaredNorm();
    const double deg =
        RotationAngularDistance(aligned.rotation, gt.rotation) * 180.0 / std::numbers::pi;
    rot_sum += deg;
    m.rotation_error_max_deg = std::max(m.rotation_error_max_deg, deg);
  }
  m.position_rmse = std::sqrt(sq / shared.size());
  m.rotation_error_mean_deg = rot_sum / shared.size();
  return m;
}

nlohmann::json ToJson(const EvalMetrics& m) {
  nlohmann::json j = {{"mean_reprojection_error_px", m.mean_reprojection_error},
                      {"registered_images", m.registered_images},
                      {"points", m.num_points},
                      {"observations", m.num_observations},
                      {"aligned", m.aligned}};
  if (m.aligned) {
    j["aligned_cameras"] = m.aligned_cameras;
    j["position_rmse"] = m.position_rmse;
    j["rotation_error_mean_deg"] = m.rotation_error_mean_deg;
    j["rotation_error_max_deg"] = m.rotation_error_max_deg;
  }
  j["timing"] = m.stage_seconds;
  return j;
}

}  // namespace psfm
