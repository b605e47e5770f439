#pragma once

#include <set>
#include <unordered_map>
#include <vector>

#include "psfm/geometry/reconstruction.h"
#include "psfm/matchgraph/dataset.h"

namespace psfm {

// Which match pairs get loaded to relate two reconstructions.
enum class CorrespondenceStrategy {
  // Pairs with one image in the source and the other in the reference.
  kOnDemand,
  // Every pair with both images inside either reconstruction.
  kPairwise,
  // Every pair of the dataset.
  kAllDataset,
};

const char* CorrespondenceStrategyName(CorrespondenceStrategy strategy);

struct LoadedMatches {
  std::size_t pairs = 0;
  // Feature matches held in memory, the memory proxy.
  std::size_t matches = 0;
};

// Feature-level links from source keypoints into keypoints of reference
// images. One-directional: only source keypoints are keys.
class CorrespondenceGraph {
 public:
  const std::vector<ImageKeypoint>& Links(const ImageKeypoint& source) const;
  std::size_t NumKeys() const { return links_.size(); }
  const LoadedMatches& Loaded() const { return loaded_; }
  std::size_t loaded_match_count() const { return loaded_.matches; }

 private:
  friend CorrespondenceGraph BuildCorrespondenceGraph(
      const Reconstruction&, const Reconstruction&, const MatchStore&,
      CorrespondenceStrategy);

  std::unordered_map<ImageKeypoint, std::vector<ImageKeypoint>,
                     ImageKeypointHash>
      links_;
  LoadedMatches loaded_;
};

// Counts what a strategy would load without building anything.
LoadedMatches CountLoadedMatches(const std::set<image_t>& source_images,
                                 const std::set<image_t>& reference_images,
                                 const MatchStore& store,
                                 CorrespondenceStrategy strategy);

// Loads matches by `strategy` and keeps the links that lead from a source
// image into a reference image. An image registered in both models also
// links each of its keypoints to itself; that costs no match records.
// The caller passes the smaller model as source.
CorrespondenceGraph BuildCorrespondenceGraph(
    const Reconstruction& source, const Reconstruction& reference,
    const MatchStore& store,
    CorrespondenceStrategy strategy = CorrespondenceStrategy::kOnDemand);

std::set<image_t> RegisteredImageSet(const Reconstruction& recon);

}  // namespace psfm
