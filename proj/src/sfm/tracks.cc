#include "psfm/sfm/tracks.h"

#include <algorithm>
#include <map>
#include <numeric>

namespace psfm {
namespace {

class UnionFind {
 public:
  std::size_t Add() {
    parent_.push_back(parent_.size());
    return parent_.size() - 1;
  }
  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::uint32_t Track::KeypointIn(image_t image_id) const {
  const auto it = std::lower_bound(
      elements.begin(), elements.end(), ImageKeypoint{image_id, 0});
  if (it == elements.end() || it->image_id != image_id) return kNoKeypoint;
  return it->keypoint_idx;
}

std::vector<Track> BuildTracks(const std::vector<MatchPair>& pairs,
                               const std::set<image_t>* subset) {
  std::map<ImageKeypoint, std::size_t> node_of;
  UnionFind uf;
  auto node = [&](const ImageKeypoint& k) {
    auto [it, inserted] = node_of.emplace(k, 0);
    if (inserted) it->second = uf.Add();
    return it->second;
  };
  for (const auto& pair : pairs) {
    if (subset && (!subset->count(pair.image_id_a) ||
                   !subset->count(pair.image_id_b))) {
      continue;
    }
    for (const auto& m : pair.matches) {
      uf.Union(node({pair.image_id_a, m.idx_a}),
               node({pair.image_id_b, m.idx_b}));
    }
  }

  // node_of iterates in (image, keypoint) order, so elements come out sorted
  // and roots are visited in order of their first element.
  std::map<std::size_t, std::size_t> track_of_root;
  std::vector<Track> tracks;
  for (const auto& [key, id] : node_of) {
    const std::size_t root = uf.Find(id);
    auto [it, inserted] = track_of_root.emplace(root, tracks.size());
    if (inserted) tracks.emplace_back();
    tracks[it->second].elements.push_back(key);
  }
  std::vector<Track> out;
  for (auto& track : tracks) {
    if (track.Length() < 2) continue;
    bool consistent = true;
    for (std::size_t i = 1; i < track.elements.size(); ++i) {
      if (track.elements[i].image_id == track.elements[i - 1].image_id) {
        consistent = false;
        break;
      }
    }
    if (consistent) out.push_back(std::move(track));
  }
  return out;
}

TrackIndex IndexTracks(const std::vector<Track>& tracks) {
  TrackIndex index;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (const auto& e : tracks[t].elements) index.emplace(e, t);
  }
  return index;
}

}  // namespace psfm
