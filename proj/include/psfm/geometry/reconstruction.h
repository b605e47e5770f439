#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "psfm/geometry/camera.h"
#include "psfm/geometry/similarity.h"

namespace psfm {

inline constexpr std::uint32_t kNoKeypoint =
    std::numeric_limits<std::uint32_t>::max();

// Keypoint `keypoint_idx` of image `image_id`.
struct ImageKeypoint {
  image_t image_id = 0;
  std::uint32_t keypoint_idx = 0;

  auto operator<=>(const ImageKeypoint&) const = default;
};

struct ImageKeypointHash {
  std::size_t operator()(const ImageKeypoint& k) const {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(k.image_id) << 32) | k.keypoint_idx);
  }
};

// One measurement of a 3D point. Keypoint-less observations (ground control
// point clicks) use kNoKeypoint.
struct Observation {
  image_t image_id = 0;
  std::uint32_t keypoint_idx = kNoKeypoint;
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();
};

struct ScenePoint {
  Point3 xyz = Point3::Zero();
  std::vector<Observation> observations;

  const Observation* FindObservation(image_t image_id) const;
};

struct RegisteredImage {
  CameraIntrinsics intrinsics;
  CameraPose pose;
};

// Cameras, sparse points and their observation tracks in one coordinate
// frame. Ordered containers keep iteration (and file output) deterministic.
class Reconstruction {
 public:
  std::uint32_t recon_id = 0;
  std::map<image_t, RegisteredImage> images;
  std::map<point3D_t, ScenePoint> points;
  std::vector<image_t> registered_order;

  bool HasImage(image_t image_id) const { return images.count(image_id) > 0; }
  std::size_t NumImages() const { return images.size(); }
  std::size_t NumPoints() const { return points.size(); }
  std::size_t NumObservations() const;

  void AddImage(image_t image_id, const CameraIntrinsics& intrinsics,
                const CameraPose& pose);
  point3D_t AddPoint(const Point3& xyz, std::vector<Observation> observations);
  // Inserts with an explicit id (file loading); keeps the id counter ahead.
  void InsertPoint(point3D_t point_id, ScenePoint point);
  void DeletePoint(point3D_t point_id);
  point3D_t NextPointId() const { return next_point_id_; }

  // Squared reprojection error of one observation, +inf if behind camera.
  double SquaredError(const ScenePoint& point, const Observation& obs) const;
  double MeanReprojectionError() const;
  double RmsReprojectionError() const;

  // Maps every keypoint-backed observation to the point holding it.
  std::unordered_map<ImageKeypoint, point3D_t, ImageKeypointHash>
  BuildObservationIndex() const;

  // Removes observations whose reprojection error exceeds `max_error` pixels
  // and then drops points left with fewer than two observations. Returns the
  // number of removed observations.
  std::size_t FilterObservations(double max_error);
  std::size_t RemoveUnderObservedPoints();

  void ApplySimilarity(const SimilarityTransform& transform);

 private:
  point3D_t next_point_id_ = 1;
};

}  // namespace psfm
