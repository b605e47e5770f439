#include "synthetic_scene.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace psfm::testing {

CameraIntrinsics DefaultIntrinsics() {
  return CameraIntrinsics::Pinhole(800.0, 320.0, 240.0, 640, 480);
}

CameraPose LookAt(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
                  const Eigen::Vector3d& up) {
  const Eigen::Vector3d z = (target - center).normalized();
  Eigen::Vector3d x = z.cross(up);
  if (x.norm() < 1e-9) x = z.cross(Eigen::Vector3d::UnitY());
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  return CameraPose::FromCenter(r, center);
}

Eigen::Matrix3d RandomRotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

SimilarityTransform RandomSimilarity(Rng& rng) {
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  std::uniform_real_distribution<double> offset(-10.0, 10.0);
  SimilarityTransform t;
  t.scale = scale(rng);
  t.rotation = RandomRotation(rng);
  t.translation = Eigen::Vector3d(offset(rng), offset(rng), offset(rng));
  return t;
}

Eigen::Vector2d GaussianNoise2(Rng& rng, double sigma) {
  if (sigma <= 0) return Eigen::Vector2d::Zero();
  std::normal_distribution<double> n(0.0, sigma);
  const double x = n(rng);
  const double y = n(rng);
  return {x, y};
}

Reconstruction MakeRingReconstruction(int num_cameras, int num_points,
                                      double noise_px, std::uint64_t seed) {
  Rng rng(seed);
  const CameraIntrinsics intr = DefaultIntrinsics();
  Reconstruction recon;
  for (int i = 0; i < num_cameras; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / num_cameras;
    const Eigen::Vector3d center(8.0 * std::cos(angle), 8.0 * std::sin(angle),
                                 2.0 + 0.5 * std::sin(3 * angle));
    recon.AddImage(static_cast<image_t>(i + 1), intr,
                   LookAt(center, Eigen::Vector3d::Zero()));
  }
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  int added = 0;
  while (added < num_points) {
    const Point3 x(coord(rng), coord(rng), coord(rng));
    std::vector<Observation> obs;
    for (const auto& [id, image] : recon.images) {
      const auto proj = ProjectPoint(image.intrinsics, image.pose, x);
      if (!proj || proj->x() < 0 || proj->y() < 0 ||
          proj->x() > intr.image_width || proj->y() > intr.image_height) {
        continue;
      }
      obs.push_back(Observation{id, static_cast<std::uint32_t>(added),
                                *proj + GaussianNoise2(rng, noise_px)});
    }
    if (obs.size() < 2) continue;
    recon.AddPoint(x, std::move(obs));
    ++added;
  }
  return recon;
}

void PerturbReconstruction(Reconstruction& recon, double magnitude,
                           std::uint64_t seed, bool perturb_points) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, magnitude);
  for (auto& [id, image] : recon.images) {
    const Eigen::Vector3d w(n(rng), n(rng), n(rng));
    const Eigen::Vector3d t(n(rng), n(rng), n(rng));
    image.pose.rotation = AngleAxisToRotation(w) * image.pose.rotation;
    image.pose.translation += t;
  }
  if (!perturb_points) return;
  for (auto& [id, point] : recon.points) {
    point.xyz += Eigen::Vector3d(n(rng), n(rng), n(rng));
  }
}

Dataset DatasetFromReconstruction(Reconstruction& truth) {
  Dataset d;
  for (const auto& [id, image] : truth.images) {
    d.images[id] = {id, image.intrinsics.image_width,
                    image.intrinsics.image_height};
    d.intrinsics[id] = image.intrinsics;
    d.features[id].image_id = id;
  }
  std::map<std::pair<image_t, image_t>, MatchPair> pairs;
  for (auto& [point_id, point] : truth.points) {
    for (auto& obs : point.observations) {
      auto& fs = d.features[obs.image_id];
      const auto& meta = d.images[obs.image_id];
      obs.xy.x() = std::clamp(obs.xy.x(), 0.0, double(meta.width));
      obs.xy.y() = std::clamp(obs.xy.y(), 0.0, double(meta.height));
      obs.keypoint_idx = static_cast<std::uint32_t>(fs.keypoints.size());
      fs.keypoints.push_back({obs.xy, 1.0});
    }
    for (std::size_t i = 0; i < point.observations.size(); ++i) {
      for (std::size_t j = i + 1; j < point.observations.size(); ++j) {
        auto a = point.observations[i], b = point.observations[j];
        if (a.image_id > b.image_id) std::swap(a, b);
        auto& pair = pairs[{a.image_id, b.image_id}];
        pair.image_id_a = a.image_id;
        pair.image_id_b = b.image_id;
        pair.matches.push_back({a.keypoint_idx, b.keypoint_idx});
      }
    }
  }
  for (auto& [key, pair] : pairs) d.matches.push_back(std::move(pair));
  return d;
}

RingDataset MakeRingDataset(int num_cameras, int num_points, double noise_px,
                            std::uint64_t seed) {
  RingDataset out;
  out.truth = MakeRingReconstruction(num_cameras, num_points, noise_px, seed);
  out.dataset = DatasetFromReconstruction(out.truth);
  return out;
}

Reconstruction SubReconstruction(const Reconstruction& truth,
                                 const std::set<image_t>& images,
                                 const std::function<bool(point3D_t)>& keep) {
  Reconstruction sub;
  for (const image_t id : truth.registered_order) {
    if (!images.count(id)) continue;
    const auto& image = truth.images.at(id);
    sub.AddImage(id, image.intrinsics, image.pose);
  }
  for (const auto& [id, point] : truth.points) {
    if (keep && !keep(id)) continue;
    ScenePoint p{point.xyz, {}};
    for (const auto& obs : point.observations) {
      if (images.count(obs.image_id)) p.observations.push_back(obs);
    }
    if (p.observations.size() >= 2) sub.InsertPoint(id, std::move(p));
  }
  return sub;
}

}  // namespace psfm::testing
