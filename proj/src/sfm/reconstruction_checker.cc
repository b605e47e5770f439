#include "psfm/sfm/reconstruction_checker.h"

#include <cmath>
#include <set>

namespace psfm {

std::vector<std::string> CheckReconstruction(const Reconstruction& recon) {
  std::vector<std::string> problems;
  const std::set<image_t> order(recon.registered_order.begin(),
                                recon.registered_order.end());
  if (order.size() != recon.registered_order.size()) {
    problems.push_back("registered_order has duplicates");
  }
  for (const auto& [id, image] : recon.images) {
    if (!order.count(id)) {
      problems.push_back("image " + std::to_string(id) + " not in registered_order");
    }
    const auto& r = image.pose.rotation;
    if (RotationOrthonormalityError(r) > 1e-9 ||
        std::abs(r.determinant() - 1.0) > 1e-9) {
      problems.push_back("image " + std::to_string(id) + " rotation not in SO(3)");
    }
  }
  for (const image_t id : order) {
    if (!recon.HasImage(id)) {
      problems.push_back("registered_order lists unknown image " + std::to_string(id));
    }
  }
  std::set<ImageKeypoint> used;
  for (const auto& [id, point] : recon.points) {
    const std::string name = "point " + std::to_string(id);
    if (point.observations.size() < 2) problems.push_back(name + " has < 2 observations");
    if (!point.xyz.allFinite()) problems.push_back(name + " is not finite");
    std::set<image_t> images;
    for (const auto& obs : point.observations) {
      if (!recon.HasImage(obs.image_id)) {
        problems.push_back(name + " observed in unregistered image " +
                           std::to_string(obs.image_id));
      }
      if (!images.insert(obs.image_id).second) {
        problems.push_back(name + " observed twice in image " +
                           std::to_string(obs.image_id));
      }
      if (obs.keypoint_idx != kNoKeypoint &&
          !used.insert({obs.image_id, obs.keypoint_idx}).second) {
        problems.push_back(name + " shares a keypoint with another point");
      }
    }
  }
  if (!recon.points.empty() && !std::isfinite(recon.MeanReprojectionError())) {
    problems.push_back("mean reprojection error is not finite");
  }
  return problems;
}

}  // namespace psfm
