#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "psfm/geometry/camera.h"

namespace psfm {

struct ImageMeta {
  image_t image_id = 0;
  int width = 0;
  int height = 0;

  double Area() const { return static_cast<double>(width) * height; }
};

struct Keypoint {
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();
  double scale = 1.0;
};

// One descriptor per row, unit L2 norm.
using DescriptorMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureSet {
  image_t image_id = 0;
  std::vector<Keypoint> keypoints;
  DescriptorMatrix descriptors;

  bool HasDescriptors() const { return descriptors.rows() > 0; }
};

struct FeatureMatch {
  std::uint32_t idx_a = 0;
  std::uint32_t idx_b = 0;

  bool operator==(const FeatureMatch&) const = default;
};

// Verified matches of one unordered image pair, stored with a < b.
struct MatchPair {
  image_t image_id_a = 0;
  image_t image_id_b = 0;
  std::vector<FeatureMatch> matches;

  std::size_t InlierCount() const { return matches.size(); }
};

// Everything the pipeline reads: image sizes, calibrated intrinsics,
// features and (optionally precomputed) verified matches.
struct Dataset {
  std::map<image_t, ImageMeta> images;
  std::map<image_t, CameraIntrinsics> intrinsics;
  std::map<image_t, FeatureSet> features;
  std::vector<MatchPair> matches;

  // Default intrinsics for images without an explicit record: focal length
  // 1.2 * max(width, height), principal point at the image center.
  CameraIntrinsics IntrinsicsFor(image_t image_id) const;
  bool HasDescriptors() const;
  // Throws std::invalid_argument describing the first violated invariant.
  void Validate() const;
};

// Swaps ids (and match sides) so that image_id_a < image_id_b.
void CanonicalizePair(MatchPair* pair);

// Read-only index over verified match pairs by unordered image pair.
class MatchStore {
 public:
  MatchStore() = default;
  explicit MatchStore(std::shared_ptr<const std::vector<MatchPair>> pairs);

  const std::vector<MatchPair>& Pairs() const { return *pairs_; }
  std::size_t NumPairs() const { return pairs_ ? pairs_->size() : 0; }
  // Null when the images were never matched.
  const MatchPair* Find(image_t a, image_t b) const;
  // Indices of all pairs touching `image_id`.
  const std::vector<std::size_t>& PairsOf(image_t image_id) const;

 private:
  static std::uint64_t Key(image_t a, image_t b);

  std::shared_ptr<const std::vector<MatchPair>> pairs_ =
      std::make_shared<const std::vector<MatchPair>>();
  std::unordered_map<std::uint64_t, std::size_t> by_pair_;
  std::unordered_map<image_t, std::vector<std::size_t>> by_image_;
};

}  // namespace psfm
