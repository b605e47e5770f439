#include "psfm/geometry/reconstruction.h"

#include <algorithm>
#include <cmath>

namespace psfm {

const Observation* ScenePoint::FindObservation(image_t image_id) const {
  for (const auto& obs : observations) {
    if (obs.image_id == image_id) return &obs;
  }
  return nullptr;
}

std::size_t Reconstruction::NumObservations() const {
  std::size_t n = 0;
  for (const auto& [id, point] : points) n += point.observations.size();
  return n;
}

void Reconstruction::AddImage(image_t image_id,
                              const CameraIntrinsics& intrinsics,
                              const CameraPose& pose) {
  if (!HasImage(image_id)) registered_order.push_back(image_id);
  images[image_id] = RegisteredImage{intrinsics, pose};
}

point3D_t Reconstruction::AddPoint(const Point3& xyz,
                                   std::vector<Observation> observations) {
  const point3D_t id = next_point_id_++;
  points.emplace(id, ScenePoint{xyz, std::move(observations)});
  return id;
}

void Reconstruction::InsertPoint(point3D_t point_id, ScenePoint point) {
  points[point_id] = std::move(point);
  next_point_id_ = std::max(next_point_id_, point_id + 1);
}

void Reconstruction::DeletePoint(point3D_t point_id) {
  points.erase(point_id);
}

double Reconstruction::SquaredError(const ScenePoint& point,
                                    const Observation& obs) const {
  const auto it = images.find(obs.image_id);
  if (it == images.end()) return std::numeric_limits<double>::infinity();
  const auto err = SquaredReprojectionError(
      it->second.intrinsics, it->second.pose, point.xyz, obs.xy);
  return err ? *err : std::numeric_limits<double>::infinity();
}

double Reconstruction::MeanReprojectionError() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [id, point] : points) {
    for (const auto& obs : point.observations) {
      sum += std::sqrt(SquaredError(point, obs));
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double Reconstruction::RmsReprojectionError() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [id, point] : points) {
    for (const auto& obs : point.observations) {
      sum += SquaredError(point, obs);
      ++n;
    }
  }
  return n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
}

std::unordered_map<ImageKeypoint, point3D_t, ImageKeypointHash>
Reconstruction::BuildObservationIndex() const {
  std::unordered_map<ImageKeypoint, point3D_t, ImageKeypointHash> index;
  index.reserve(NumObservations());
  for (const auto& [id, point] : points) {
    for (const auto& obs : point.observations) {
      if (obs.keypoint_idx == kNoKeypoint) continue;
      index.emplace(ImageKeypoint{obs.image_id, obs.keypoint_idx}, id);
    }
  }
  return index;
}

std::size_t Reconstruction::FilterObservations(double max_error) {
  const double max_sq = max_error * max_error;
  std::size_t removed = 0;
  for (auto& [id, point] : points) {
    auto& obs = point.observations;
    const auto before = obs.size();
    obs.erase(std::remove_if(obs.begin(), obs.end(),
                             [&](const Observation& o) {
                               return !(SquaredError(point, o) <= max_sq);
                             }),
              obs.end());
    removed += before - obs.size();
  }
  RemoveUnderObservedPoints();
  return removed;
}

std::size_t Reconstruction::RemoveUnderObservedPoints() {
  return std::erase_if(points, [](const auto& entry) {
    return entry.second.observations.size() < 2;
  });
}

void Reconstruction::ApplySimilarity(const SimilarityTransform& transform) {
  for (auto& [id, image] : images) {
    image.pose = transform.ApplyToPose(image.pose);
  }
  for (auto& [id, point] : points) {
    point.xyz = transform.Apply(point.xyz);
  }
}

}  // namespace psfm
