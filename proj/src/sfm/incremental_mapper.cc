#include "psfm/sfm/incremental_mapper.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "psfm/geometry/triangulation.h"
#include "psfm/sfm/tracks.h"

namespace psfm {
namespace {

class Mapper {
 public:
  Mapper(const std::vector<image_t>& subset, const Dataset& dataset,
         const std::vector<MatchPair>& pairs, const MapperOptions& options)
      : dataset_(dataset), options_(options), subset_(subset.begin(), subset.end()) {
    for (const auto& p : pairs) {
      if (subset_.count(p.image_id_a) && subset_.count(p.image_id_b)) {
        pairs_.push_back(p);
      }
    }
    tracks_ = BuildTracks(pairs_);
    track_point_.assign(tracks_.size(), 0);
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      for (const auto& e : tracks_[t].elements) {
        image_tracks_[e.image_id].emplace_back(e.keypoint_idx, t);
      }
    }
  }

  Expected<Reconstruction> Run(MapperReport* report) {
    auto seed = SelectSeedPair(pairs_, dataset_, options_.seed);
    if (!seed.ok()) return seed.error();
    if (report) report->seed = *seed;
    Initialize(*seed);
    GlobalAdjust(report);
    if (recon_.NumPoints() == 0) {
      return MakeError(ErrorCode::kDegenerate, "seed pair triangulated no points");
    }

    std::size_t last_global = recon_.NumImages();
    std::map<image_t, std::size_t> failed_at;  // visible count at failure
    while (true) {
      const auto next = NextBestView(failed_at);
      if (!next) break;
      const auto [image_id, visible] = *next;
      if (!Register(image_id)) {
        failed_at[image_id] = visible;
        if (report) ++report->num_failed_resections;
        continue;
      }
      failed_at.erase(image_id);
      TriangulateImage(image_id);
      LocalAdjust(image_id);
      if (report) ++report->num_local_ba;
      if (recon_.NumImages() >=
          options_.growth_ratio * static_cast<double>(last_global)) {
        GlobalAdjust(report);
        last_global = recon_.NumImages();
      }
    }
    GlobalAdjust(report);
    recon_.RemoveUnderObservedPoints();
    SyncTracks();

    if (report) {
      report->registered_order = recon_.registered_order;
      report->unregistered.clear();
      for (const image_t id : subset_) {
        if (!recon_.HasImage(id)) report->unregistered.push_back(id);
      }
    }
    return std::move(recon_);
  }

 private:
  const Eigen::Vector2d& Pixel(image_t image_id, std::uint32_t kp) const {
    return dataset_.features.at(image_id).keypoints.at(kp).xy;
  }

  void Initialize(const SeedResult& seed) {
    recon_.AddImage(seed.image_a, dataset_.IntrinsicsFor(seed.image_a),
                    CameraPose());
    recon_.AddImage(seed.image_b, dataset_.IntrinsicsFor(seed.image_b),
                    seed.relative_pose);
    std::set<std::pair<std::uint32_t, std::uint32_t>> inliers;
    for (const auto& m : seed.inliers) inliers.emplace(m.idx_a, m.idx_b);
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      const auto ka = tracks_[t].KeypointIn(seed.image_a);
      const auto kb = tracks_[t].KeypointIn(seed.image_b);
      if (ka == kNoKeypoint || kb == kNoKeypoint) continue;
      if (!inliers.count({ka, kb})) continue;
      TriangulateTrack(t);
    }
  }

  // Triangulates a track from all of its registered observations and keeps
  // those that reproject within the threshold.
  bool TriangulateTrack(std::size_t t) {
    if (track_point_[t] != 0) return false;
    std::vector<TriangulationObservation> obs;
    std::vector<Observation> candidates;
    for (const auto& e : tracks_[t].elements) {
      const auto it = recon_.images.find(e.image_id);
      if (it == recon_.images.end()) continue;
      if (used_.count(e)) continue;
      const auto& px = Pixel(e.image_id, e.keypoint_idx);
      obs.push_back({it->second.intrinsics, it->second.pose, px});
      candidates.push_back({e.image_id, e.keypoint_idx, px});
    }
    if (obs.size() < 2) return false;
    TriangulationOptions tri;
    tri.min_tri_angle_deg = options_.min_tri_angle_deg;
    const auto x = TriangulatePoint(obs, tri);
    if (!x.ok()) return false;
    const double max_sq = options_.max_reproj_error_px * options_.max_reproj_error_px;
    std::vector<Observation> kept;
    std::vector<Eigen::Vector3d> centers;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto err = SquaredReprojectionError(obs[i].intrinsics, obs[i].pose,
                                                *x, candidates[i].xy);
      if (err && *err <= max_sq) {
        kept.push_back(candidates[i]);
        centers.push_back(obs[i].pose.Center());
      }
    }
    if (kept.size() < 2) return false;
    double max_angle = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      for (std::size_t j = i + 1; j < centers.size(); ++j) {
        max_angle = std::max(max_angle, TriangulationAngle(centers[i], centers[j], *x));
      }
    }
    if (max_angle * 180.0 / M_PI < options_.min_tri_angle_deg) return false;
    for (const auto& o : kept) used_.insert({o.image_id, o.keypoint_idx});
    const point3D_t id = recon_.AddPoint(*x, std::move(kept));
    track_point_[t] = id;
    point_track_[id] = t;
    return true;
  }

  std::size_t VisibleCount(image_t image_id) const {
    const auto it = image_tracks_.find(image_id);
    if (it == image_tracks_.end()) return 0;
    std::size_t count = 0;
    for (const auto& [kp, t] : it->second) count += track_point_[t] != 0;
    return count;
  }

  std::optional<std::pair<image_t, std::size_t>> NextBestView(
      const std::map<image_t, std::size_t>& failed_at) const {
    std::optional<std::pair<image_t, std::size_t>> best;
    for (const image_t id : subset_) {
      if (recon_.HasImage(id)) continue;
      const std::size_t visible = VisibleCount(id);
      if (visible < options_.min_resection_corrs) continue;
      const auto failed = failed_at.find(id);
      if (failed != failed_at.end() && visible <= failed->second) continue;
      if (!best || visible > best->second) best = {id, visible};
    }
    return best;
  }

  bool Register(image_t image_id) {
    std::vector<Point3> xyz;
    std::vector<Eigen::Vector2d> px;
    std::vector<std::pair<point3D_t, std::uint32_t>> refs;
    for (const auto& [kp, t] : image_tracks_.at(image_id)) {
      if (track_point_[t] == 0) continue;
      xyz.push_back(recon_.points.at(track_point_[t]).xyz);
      px.push_back(Pixel(image_id, kp));
      refs.emplace_back(track_point_[t], kp);
    }
    const auto intr = dataset_.IntrinsicsFor(image_id);
    ResectionOptions ro = options_.resection;
    ro.max_error_px = options_.max_reproj_error_px;
    ro.seed = options_.rng_seed * 7919 + image_id;
    const auto result = ResectCamera(xyz, px, intr, ro);
    if (!result.ok() || result->num_inliers < options_.min_resection_corrs) {
      return false;
    }
    recon_.AddImage(image_id, intr, result->pose);
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (!result->inlier_mask[i]) continue;
      const auto [point_id, kp] = refs[i];
      auto& point = recon_.points.at(point_id);
      if (point.FindObservation(image_id)) continue;
      point.observations.push_back({image_id, kp, px[i]});
      used_.insert({image_id, kp});
    }
    return true;
  }

  void TriangulateImage(image_t image_id) {
    for (const auto& [kp, t] : image_tracks_.at(image_id)) {
      if (track_point_[t] == 0) TriangulateTrack(t);
    }
  }

  void LocalAdjust(image_t image_id) {
    BaOptions ba = options_.local_ba;
    for (const auto& [id, image] : recon_.images) {
      if (id != image_id) ba.fixed_image_ids.insert(id);
    }
    std::set<point3D_t> subset;
    for (const auto& [kp, t] : image_tracks_.at(image_id)) {
      if (track_point_[t] != 0) subset.insert(track_point_[t]);
    }
    ba.point_subset = std::move(subset);
    BundleAdjust(recon_, ba);
  }

  void GlobalAdjust(MapperReport* report) {
    const auto ba = BundleAdjust(recon_, options_.global_ba);
    if (report) {
      if (report->num_global_ba == 0) report->initial_global_cost = ba.initial_cost;
      report->final_global_cost = ba.final_cost;
      ++report->num_global_ba;
    }
    recon_.FilterObservations(options_.max_reproj_error_px);
    SyncTracks();
    // Retry tracks that have no point, including those just pruned.
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      if (track_point_[t] == 0) TriangulateTrack(t);
    }
  }

  // Drops track links of deleted points and releases their keypoints.
  void SyncTracks() {
    used_.clear();
    for (auto it = point_track_.begin(); it != point_track_.end();) {
      if (!recon_.points.count(it->first)) {
        track_point_[it->second] = 0;
        it = point_track_.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& [id, point] : recon_.points) {
      for (const auto& obs : point.observations) {
        used_.insert({obs.image_id, obs.keypoint_idx});
      }
    }
  }

  const Dataset& dataset_;
  const MapperOptions& options_;
  std::set<image_t> subset_;
  std::vector<MatchPair> pairs_;
  std::vector<Track> tracks_;
  std::vector<point3D_t> track_point_;
  std::map<point3D_t, std::size_t> point_track_;
  std::map<image_t, std::vector<std::pair<std::uint32_t, std::size_t>>> image_tracks_;
  std::set<ImageKeypoint> used_;
  Reconstruction recon_;
};

}  // namespace

Expected<Reconstruction> IncrementalReconstruct(
    const std::vector<image_t>& subset, const Dataset& dataset,
    const std::vector<MatchPair>& pairs, const MapperOptions& options,
    MapperReport* report) {
  if (subset.empty()) {
    return MakeError(ErrorCode::kInvalidArgument, "empty image subset");
  }
  Mapper mapper(subset, dataset, pairs, options);
  return mapper.Run(report);
}

}  // namespace psfm
