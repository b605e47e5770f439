#include "psfm/matchgraph/dataset.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace psfm {

CameraIntrinsics Dataset::IntrinsicsFor(image_t image_id) const {
  const auto it = intrinsics.find(image_id);
  if (it != intrinsics.end()) return it->second;
  const auto meta = images.find(image_id);
  if (meta == images.end()) {
    throw std::out_of_range("unknown image " + std::to_string(image_id));
  }
  const int w = meta->second.width;
  const int h = meta->second.height;
  return CameraIntrinsics::Pinhole(1.2 * std::max(w, h), 0.5 * w, 0.5 * h, w,
                                   h);
}

bool Dataset::HasDescriptors() const {
  return std::any_of(features.begin(), features.end(), [](const auto& f) {
    return f.second.HasDescriptors();
  });
}

void Dataset::Validate() const {
  for (const auto& [id, meta] : images) {
    if (meta.image_id != id) throw std::invalid_argument("image id mismatch");
    if (meta.width <= 0 || meta.height <= 0) {
      throw std::invalid_argument("image " + std::to_string(id) +
                                  " has non-positive size");
    }
  }
  for (const auto& [id, intr] : intrinsics) {
    if (!images.count(id) || !intr.IsValid()) {
      throw std::invalid_argument("invalid intrinsics for image " +
                                  std::to_string(id));
    }
  }
  for (const auto& [id, fs] : features) {
    const auto meta = images.find(id);
    if (meta == images.end()) {
      throw std::invalid_argument("features for unknown image " +
                                  std::to_string(id));
    }
    if (fs.HasDescriptors() &&
        static_cast<std::size_t>(fs.descriptors.rows()) != fs.keypoints.size()) {
      throw std::invalid_argument("keypoint/descriptor count mismatch in image " +
                                  std::to_string(id));
    }
    for (const auto& kp : fs.keypoints) {
      if (kp.xy.x() < 0 || kp.xy.y() < 0 || kp.xy.x() > meta->second.width ||
          kp.xy.y() > meta->second.height) {
        throw std::invalid_argument("keypoint outside image " +
                                    std::to_string(id));
      }
    }
  }
  for (const auto& pair : matches) {
    if (pair.image_id_a == pair.image_id_b) {
      throw std::invalid_argument("match pair with identical images");
    }
    for (image_t id : {pair.image_id_a, pair.image_id_b}) {
      if (!images.count(id)) {
        throw std::invalid_argument("match references unknown image " +
                                    std::to_string(id));
      }
    }
    const auto fa = features.find(pair.image_id_a);
    const auto fb = features.find(pair.image_id_b);
    const std::size_t na = fa == features.end() ? 0 : fa->second.keypoints.size();
    const std::size_t nb = fb == features.end() ? 0 : fb->second.keypoints.size();
    for (const auto& m : pair.matches) {
      if (m.idx_a >= na || m.idx_b >= nb) {
        throw std::invalid_argument("match index out of range");
      }
    }
  }
}

void CanonicalizePair(MatchPair* pair) {
  if (pair->image_id_a < pair->image_id_b) return;
  std::swap(pair->image_id_a, pair->image_id_b);
  for (auto& m : pair->matches) std::swap(m.idx_a, m.idx_b);
}

MatchStore::MatchStore(std::shared_ptr<const std::vector<MatchPair>> pairs)
    : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_->size(); ++i) {
    const auto& p = (*pairs_)[i];
    by_pair_.emplace(Key(p.image_id_a, p.image_id_b), i);
    by_image_[p.image_id_a].push_back(i);
    by_image_[p.image_id_b].push_back(i);
  }
}

const MatchPair* MatchStore::Find(image_t a, image_t b) const {
  const auto it = by_pair_.find(Key(a, b));
  return it == by_pair_.end() ? nullptr : &(*pairs_)[it->second];
}

const std::vector<std::size_t>& MatchStore::PairsOf(image_t image_id) const {
  static const std::vector<std::size_t> kEmpty;
  const auto it = by_image_.find(image_id);
  return it == by_image_.end() ? kEmpty : it->second;
}

std::uint64_t MatchStore::Key(image_t a, image_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace psfm
