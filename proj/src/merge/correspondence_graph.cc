#include "psfm/merge/correspondence_graph.h"

#include <algorithm>

namespace psfm {
namespace {

bool Loads(const MatchPair& pair, const std::set<image_t>& source,
           const std::set<image_t>& reference,
           CorrespondenceStrategy strategy) {
  const image_t a = pair.image_id_a;
  const image_t b = pair.image_id_b;
  switch (strategy) {
    case CorrespondenceStrategy::kOnDemand:
      return (source.count(a) && reference.count(b)) ||
             (source.count(b) && reference.count(a));
    case CorrespondenceStrategy::kPairwise:
      return (source.count(a) || reference.count(a)) &&
             (source.count(b) || reference.count(b));
    case CorrespondenceStrategy::kAllDataset:
      return true;
  }
  return false;
}

// Pair indices a strategy loads, each once, ascending.
std::vector<std::size_t> LoadedPairs(const std::set<image_t>& source,
                                     const std::set<image_t>& reference,
                                     const MatchStore& store,
                                     CorrespondenceStrategy strategy) {
  std::vector<std::size_t> loaded;
  if (strategy == CorrespondenceStrategy::kAllDataset) {
    loaded.resize(store.NumPairs());
    for (std::size_t i = 0; i < loaded.size(); ++i) loaded[i] = i;
    return loaded;
  }
  // Every loaded pair touches a source image under on-demand, and an image
  // of either model under pairwise.
  std::set<image_t> seeds = source;
  if (strategy == CorrespondenceStrategy::kPairwise) {
    seeds.insert(reference.begin(), reference.end());
  }
  for (const image_t image_id : seeds) {
    for (const std::size_t idx : store.PairsOf(image_id)) {
      if (Loads(store.Pairs()[idx], source, reference, strategy)) {
        loaded.push_back(idx);
      }
    }
  }
  std::sort(loaded.begin(), loaded.end());
  loaded.erase(std::unique(loaded.begin(), loaded.end()), loaded.end());
  return loaded;
}

}  // namespace

const char* CorrespondenceStrategyName(CorrespondenceStrategy strategy) {
  switch (strategy) {
    case CorrespondenceStrategy::kOnDemand: return "on_demand";
    case CorrespondenceStrategy::kPairwise: return "pairwise";
    case CorrespondenceStrategy::kAllDataset: return "all_dataset";
  }
  return "unknown";
}

std::set<image_t> RegisteredImageSet(const Reconstruction& recon) {
  std::set<image_t> ids;
  for (const auto& [id, image] : recon.images) ids.insert(id);
  return ids;
}

const std::vector<ImageKeypoint>& CorrespondenceGraph::Links(
    const ImageKeypoint& source) const {
  static const std::vector<ImageKeypoint> kEmpty;
  const auto it = links_.find(source);
  return it == links_.end() ? kEmpty : it->second;
}

LoadedMatches CountLoadedMatches(const std::set<image_t>& source_images,
                                 const std::set<image_t>& reference_images,
                                 const MatchStore& store,
                                 CorrespondenceStrategy strategy) {
  LoadedMatches count;
  for (const std::size_t idx :
       LoadedPairs(source_images, reference_images, store, strategy)) {
    ++count.pairs;
    count.matches += store.Pairs()[idx].matches.size();
  }
  return count;
}

CorrespondenceGraph BuildCorrespondenceGraph(const Reconstruction& source,
                                             const Reconstruction& reference,
                                             const MatchStore& store,
                                             CorrespondenceStrategy strategy) {
  const std::set<image_t> src = RegisteredImageSet(source);
  const std::set<image_t> ref = RegisteredImageSet(reference);
  CorrespondenceGraph graph;
  for (const std::size_t idx : LoadedPairs(src, ref, store, strategy)) {
    const MatchPair& pair = store.Pairs()[idx];
    ++graph.loaded_.pairs;
    graph.loaded_.matches += pair.matches.size();
    const bool a_to_b = src.count(pair.image_id_a) && ref.count(pair.image_id_b);
    const bool b_to_a = src.count(pair.image_id_b) && ref.count(pair.image_id_a);
    for (const auto& m : pair.matches) {
      const ImageKeypoint ka{pair.image_id_a, m.idx_a};
      const ImageKeypoint kb{pair.image_id_b, m.idx_b};
      if (a_to_b) graph.links_[ka].push_back(kb);
      if (b_to_a) graph.links_[kb].push_back(ka);
    }
  }
  // Images registered in both models: a keypoint is its own correspondence.
  for (const auto& [id, point] : source.points) {
    for (const auto& obs : point.observations) {
      if (obs.keypoint_idx == kNoKeypoint || !ref.count(obs.image_id)) continue;
      const ImageKeypoint k{obs.image_id, obs.keypoint_idx};
      graph.links_[k].push_back(k);
    }
  }
  for (auto& [key, targets] : graph.links_) {
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  }
  return graph;
}

}  // namespace psfm
