#include "psfm/pipeline/synthetic.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>

#include "psfm/matchgraph/dataset_io.h"
#include "psfm/merge/gcp_io.h"
#include "psfm/sfm/reconstruction_io.h"
#include "psfm/util/random.h"

namespace psfm {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Box {
  double x0, y0, x1, y1, height;
};

double Terrain(double x, double y) {
  return 2.0 * std::sin(x / 35.0) + 1.5 * std::cos(y / 45.0);
}

Eigen::Matrix3d RotX(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
Eigen::Matrix3d RotY(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
Eigen::Matrix3d RotZ(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

// World-to-camera rotation of a camera looking straight down, image x
// along world x and image y along world -y.
Eigen::Matrix3d NadirRotation() {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  return r;
}

CameraPose LookAt(const Eigen::Vector3d& center, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - center).normalized();
  const Eigen::Vector3d x = z.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  return CameraPose::FromCenter(r, center);
}

struct Layout {
  std::vector<CameraPose> poses;
  std::vector<int> rig_view;
  // Region points are drawn from.
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// Grid of `stations` positions with the given spacing, serpentine order.
std::vector<Eigen::Vector2d> Grid(int stations, double dx, double dy) {
  const int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(stations))));
  const int rows = (stations + cols - 1) / cols;
  std::vector<Eigen::Vector2d> out;
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < cols && static_cast<int>(out.size()) < stations; ++k) {
      const int c = r % 2 == 0 ? k : cols - 1 - k;
      out.emplace_back(c * dx, r * dy);
    }
  }
  return out;
}

Layout MakeLayout(const SyntheticConfig& cfg, Rng& rng) {
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double foot_x = cfg.altitude_m * cfg.image_width / cfg.focal_px;
  const double foot_y = cfg.altitude_m * cfg.image_height / cfg.focal_px;
  const double dx = foot_x * (1.0 - cfg.overlap);
  const double dy = foot_y * (1.0 - cfg.overlap);
  // Small attitude noise keeps the views from being perfectly parallel.
  const auto wobble = [&] {
    return RotZ(0.02 * jitter(rng)) * RotY(0.01 * jitter(rng)) *
           RotX(0.01 * jitter(rng));
  };
  Layout layout;
  const auto set_bounds = [&](const std::vector<Eigen::Vector2d>& stations,
                              double margin) {
    layout.x0 = layout.y0 = 1e300;
    layout.x1 = layout.y1 = -1e300;
    for (const auto& s : stations) {
      layout.x0 = std::min(layout.x0, s.x() - margin);
      layout.x1 = std::max(layout.x1, s.x() + margin);
      layout.y0 = std::min(layout.y0, s.y() - margin);
      layout.y1 = std::max(layout.y1, s.y() + margin);
    }
  };

  switch (cfg.pattern) {
    case CameraPattern::kNadir: {
      const auto stations = Grid(cfg.image_count, dx, dy);
      for (const auto& s : stations) {
        const Eigen::Vector3d c(s.x(), s.y(), cfg.altitude_m + Terrain(s.x(), s.y()));
        layout.poses.push_back(
            CameraPose::FromCenter(NadirRotation() * wobble().transpose(), c));
        layout.rig_view.push_back(0);
      }
      set_bounds(stations, 0.5 * std::max(foot_x, foot_y));
      break;
    }
    case CameraPattern::kOblique: {
      const int n_stations = (cfg.image_count + 4) / 5;
      // Obliques see further out, so stations sit closer together.
      const auto stations = Grid(n_stations, dx, dy);
      const double tilt = cfg.rig_tilt_deg * kDegToRad;
      // Camera-frame tilts: nadir, forward, backward, left, right.
      const Eigen::Matrix3d tilts[5] = {Eigen::Matrix3d::Identity(), RotX(tilt),
                                        RotX(-tilt), RotY(tilt), RotY(-tilt)};
      for (const auto& s : stations) {
        const Eigen::Vector3d c(s.x(), s.y(), cfg.altitude_m + Terrain(s.x(), s.y()));
        const Eigen::Matrix3d base = NadirRotation() * wobble().transpose();
        for (int v = 0; v < 5 && static_cast<int>(layout.poses.size()) < cfg.image_count;
             ++v) {
          layout.poses.push_back(CameraPose::FromCenter(tilts[v] * base, c));
          layout.rig_view.push_back(v);
        }
      }
      set_bounds(stations, cfg.altitude_m * std::tan(tilt) + 0.5 * foot_x);
      break;
    }
    case CameraPattern::kOrbit: {
      const double radius = 1.2 * cfg.altitude_m;
      for (int i = 0; i < cfg.image_count; ++i) {
        const double a = 2.0 * std::numbers::pi * i / cfg.image_count;
        const Eigen::Vector3d c(radius * std::cos(a), radius * std::sin(a),
                                cfg.altitude_m);
        layout.poses.push_back(LookAt(c, Eigen::Vector3d(0, 0, Terrain(0, 0))));
        layout.rig_view.push_back(-1);
      }
      const double half = 0.35 * radius;
      layout.x0 = layout.y0 = -half;
      layout.x1 = layout.y1 = half;
      break;
    }
  }
  return layout;
}

std::vector<Box> MakeBuildings(const SyntheticConfig& cfg, const Layout& layout,
                               Rng& rng) {
  std::uniform_real_distribution<double> ux(layout.x0, layout.x1);
  std::uniform_real_distribution<double> uy(layout.y0, layout.y1);
  std::uniform_real_distribution<double> size(15.0, 40.0);
  std::uniform_real_distribution<double> height(8.0, 0.3 * cfg.altitude_m);
  std::vector<Box> boxes;
  for (int i = 0; i < cfg.building_count; ++i) {
    const double cx = ux(rng), cy = uy(rng), w = size(rng), d = size(rng);
    boxes.push_back({cx - w / 2, cy - d / 2, cx + w / 2, cy + d / 2, height(rng)});
  }
  return boxes;
}

// Uniform-ish surface sample: terrain or a building roof/facade.
Point3 SampleSurface(const Layout& layout, const std::vector<Box>& boxes,
                     Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double ground = (layout.x1 - layout.x0) * (layout.y1 - layout.y0);
  std::vector<double> facade(boxes.size());
  double facade_total = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    facade[i] = 2.0 * ((b.x1 - b.x0) + (b.y1 - b.y0)) * b.height;
    facade_total += facade[i];
  }
  if (u(rng) * (ground + facade_total) < facade_total) {
    double pick = u(rng) * facade_total;
    std::size_t i = 0;
    while (i + 1 < boxes.size() && pick > facade[i]) pick -= facade[i++];
    const Box& b = boxes[i];
    const double t = u(rng);
    const double base = Terrain(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
    const double z = base + u(rng) * b.height;
    switch (static_cast<int>(u(rng) * 4)) {
      case 0: return {b.x0 + t * (b.x1 - b.x0), b.y0, z};
      case 1: return {b.x0 + t * (b.x1 - b.x0), b.y1, z};
      case 2: return {b.x0, b.y0 + t * (b.y1 - b.y0), z};
      default: return {b.x1, b.y0 + t * (b.y1 - b.y0), z};
    }
  }
  const double x = layout.x0 + u(rng) * (layout.x1 - layout.x0);
  const double y = layout.y0 + u(rng) * (layout.y1 - layout.y0);
  for (const Box& b : boxes) {
    if (x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1) {
      return {x, y, Terrain(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)) + b.height};
    }
  }
  return {x, y, Terrain(x, y)};
}

struct View {
  image_t image_id;
  Eigen::Vector2d pixel;
};

std::vector<View> Observe(const Point3& x, const Reconstruction& truth,
                          double noise_px, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<View> views;
  for (const auto& [id, image] : truth.images) {
    const auto p = ProjectPoint(image.intrinsics, image.pose, x);
    if (!p) continue;
    // Noise is drawn for every candidate view so the stream does not depend
    // on which projections land inside the image.
    const Eigen::Vector2d noise(n(rng) * noise_px, n(rng) * noise_px);
    const Eigen::Vector2d q = *p + noise;
    if (q.x() < 0 || q.y() < 0 || q.x() > image.intrinsics.image_width ||
        q.y() > image.intrinsics.image_height) {
      continue;
    }
    views.push_back({id, q});
  }
  return views;
}

Eigen::VectorXf RandomUnit(int dim, Rng& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  Eigen::VectorXf v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  return v.normalized();
}

}  // namespace

const char* CameraPatternName(CameraPattern pattern) {
  switch (pattern) {
    case CameraPattern::kNadir: return "nadir";
    case CameraPattern::kOblique: return "oblique";
    case CameraPattern::kOrbit: return "orbit";
  }
  return "unknown";
}

CameraPattern ParseCameraPattern(const std::string& name) {
  if (name == "nadir") return CameraPattern::kNadir;
  if (name == "oblique") return CameraPattern::kOblique;
  if (name == "orbit") return CameraPattern::kOrbit;
  throw std::invalid_argument("unknown camera pattern '" + name + "'");
}

SyntheticConfig StandardSyntheticConfig() {
  SyntheticConfig cfg;
  cfg.image_count = 120;
  cfg.point_count = 4000;
  cfg.noise_px = 0.4;
  cfg.overlap = 0.8;
  cfg.gcp_count = 10;
  cfg.control_count = 3;
  return cfg;
}

SyntheticScene GenerateSynthetic(const SyntheticConfig& cfg) {
  if (cfg.image_count < 2) {
    throw std::invalid_argument("synthetic scene needs at least 2 images");
  }
  if (cfg.control_count > cfg.gcp_count && cfg.gcp_count > 0) {
    throw std::invalid_argument("more control points than GCPs");
  }
  Rng rng(cfg.seed);
  const Layout layout = MakeLayout(cfg, rng);
  const std::vector<Box> boxes = MakeBuildings(cfg, layout, rng);
  const CameraIntrinsics intr =
      CameraIntrinsics::Pinhole(cfg.focal_px, 0.5 * cfg.image_width,
                                0.5 * cfg.image_height, cfg.image_width,
                                cfg.image_height);

  SyntheticScene scene;
  for (std::size_t i = 0; i < layout.poses.size(); ++i) {
    const image_t id = static_cast<image_t>(i + 1);
    scene.truth.AddImage(id, intr, layout.poses[i]);
    scene.rig_view[id] = layout.rig_view[i];
    scene.dataset.images[id] = {id, cfg.image_width, cfg.image_height};
    scene.dataset.intrinsics[id] = intr;
    scene.dataset.features[id].image_id = id;
  }

  // Scene points seen by at least two cameras.
  std::vector<Eigen::VectorXf> point_desc;
  const int max_attempts = 200 * std::max(cfg.point_count, 1);
  for (int attempt = 0;
       attempt < max_attempts &&
       static_cast<int>(scene.truth.NumPoints()) < cfg.point_count;
       ++attempt) {
    const Point3 x = SampleSurface(layout, boxes, rng);
    const auto views = Observe(x, scene.truth, cfg.noise_px, rng);
    if (views.size() < 2) continue;
    std::vector<Observation> obs;
    for (const auto& v : views) obs.push_back({v.image_id, kNoKeypoint, v.pixel});
    scene.truth.AddPoint(x, std::move(obs));
    point_desc.push_back(RandomUnit(cfg.descriptor_dim, rng));
  }

  // Keypoints per image: observed points in point order, then distractors.
  std::uniform_real_distribution<double> scale(1.0, 8.0);
  std::normal_distribution<float> dnoise(0.0f, static_cast<float>(cfg.descriptor_noise));
  std::map<image_t, std::vector<Eigen::VectorXf>> descs;
  std::size_t p = 0;
  for (auto& [point_id, point] : scene.truth.points) {
    for (auto& obs : point.observations) {
      auto& fs = scene.dataset.features[obs.image_id];
      obs.keypoint_idx = static_cast<std::uint32_t>(fs.keypoints.size());
      fs.keypoints.push_back({obs.xy, scale(rng)});
      Eigen::VectorXf d = point_desc[p];
      for (int k = 0; k < d.size(); ++k) d[k] += dnoise(rng);
      descs[obs.image_id].push_back(d.normalized());
    }
    ++p;
  }
  std::uniform_real_distribution<double> ux(0.0, cfg.image_width);
  std::uniform_real_distribution<double> uy(0.0, cfg.image_height);
  for (auto& [id, fs] : scene.dataset.features) {
    const auto extra = static_cast<std::size_t>(
        std::lround(cfg.distractor_ratio * fs.keypoints.size()));
    for (std::size_t k = 0; k < extra; ++k) {
      fs.keypoints.push_back({{ux(rng), uy(rng)}, scale(rng)});
      descs[id].push_back(RandomUnit(cfg.descriptor_dim, rng));
    }
    fs.descriptors.resize(static_cast<Eigen::Index>(fs.keypoints.size()),
                          cfg.descriptor_dim);
    for (std::size_t k = 0; k < fs.keypoints.size(); ++k) {
      fs.descriptors.row(static_cast<Eigen::Index>(k)) = descs[id][k].transpose();
    }
  }

  // Precomputed matches of every pair sharing enough points.
  std::map<std::pair<image_t, image_t>, MatchPair> pairs;
  for (const auto& [point_id, point] : scene.truth.points) {
    const auto& obs = point.observations;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      for (std::size_t j = i + 1; j < obs.size(); ++j) {
        auto a = obs[i], b = obs[j];
        if (a.image_id > b.image_id) std::swap(a, b);
        auto& pair = pairs[{a.image_id, b.image_id}];
        pair.image_id_a = a.image_id;
        pair.image_id_b = b.image_id;
        pair.matches.push_back({a.keypoint_idx, b.keypoint_idx});
      }
    }
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& [key, pair] : pairs) {
    if (static_cast<int>(pair.matches.size()) < cfg.min_shared_for_matches) continue;
    const auto n_b = scene.dataset.features[pair.image_id_b].keypoints.size();
    std::uniform_int_distribution<std::uint32_t> any_b(
        0, static_cast<std::uint32_t>(n_b - 1));
    for (auto& m : pair.matches) {
      if (u(rng) < cfg.outlier_rate) m.idx_b = any_b(rng);
    }
    scene.dataset.matches.push_back(std::move(pair));
  }

  // GCPs on the terrain, controls spread by farthest-point selection.
  if (cfg.gcp_count > 0) {
    std::vector<std::pair<Point3, std::vector<View>>> candidates;
    for (int attempt = 0;
         attempt < 1000 * cfg.gcp_count &&
         static_cast<int>(candidates.size()) < cfg.gcp_count;
         ++attempt) {
      const double x = layout.x0 + u(rng) * (layout.x1 - layout.x0);
      const double y = layout.y0 + u(rng) * (layout.y1 - layout.y0);
      const Point3 w(x, y, Terrain(x, y));
      auto views = Observe(w, scene.truth, cfg.noise_px, rng);
      if (views.size() >= 2) candidates.emplace_back(w, std::move(views));
    }
    std::vector<int> role(candidates.size(), 0);
    Point3 centroid = Point3::Zero();
    for (const auto& c : candidates) centroid += c.first / candidates.size();
    std::vector<std::size_t> controls;
    for (int k = 0; k < cfg.control_count && k < static_cast<int>(candidates.size());
         ++k) {
      std::size_t best = 0;
      double best_d = -1;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (role[i]) continue;
        double d = controls.empty() ? (candidates[i].first - centroid).norm() : 1e300;
        for (const std::size_t c : controls) {
          d = std::min(d, (candidates[i].first - candidates[c].first).norm());
        }
        if (d > best_d) {
          best_d = d;
          best = i;
        }
      }
      role[best] = 1;
      controls.push_back(best);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      GcpRecord gcp;
      gcp.gcp_id = static_cast<std::uint32_t>(i + 1);
      gcp.world = candidates[i].first;
      gcp.role = role[i] ? GcpRole::kControl : GcpRole::kCheck;
      for (const auto& v : candidates[i].second) {
        gcp.observations.push_back({v.image_id, v.pixel});
      }
      scene.gcps.push_back(std::move(gcp));
    }
  }
  return scene;
}

void WriteSynthetic(const SyntheticScene& scene, const std::string& directory) {
  std::filesystem::create_directories(directory);
  const std::filesystem::path dir(directory);
  WriteDataset(scene.dataset, (dir / "dataset.txt").string(), false);
  WriteMatches(scene.dataset.matches, (dir / "matches.txt").string());
  WriteReconstruction(scene.truth, (dir / "truth.txt").string());
  WriteGcps(scene.gcps, (dir / "gcps.txt").string());
}

}  // namespace psfm
