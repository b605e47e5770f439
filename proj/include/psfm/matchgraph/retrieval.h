#pragma once

#include <map>
#include <vector>

#include "psfm/matchgraph/dataset.h"
#include "psfm/matchgraph/vocabulary.h"

namespace psfm {

struct RetrievalOptions {
  // Features used to index each image, largest scale first.
  int index_features = 1500;
  // Most similar images retrieved per query image.
  int top_k = 100;
  int num_workers = 1;
};

struct CandidatePair {
  image_t image_id_a = 0;  // < image_id_b
  image_t image_id_b = 0;
  double score = 0;        // best cosine similarity that produced the pair
};

// Indices of the `count` largest-scale keypoints (scale descending, ties by
// index ascending).
std::vector<std::size_t> TopScaleFeatures(const FeatureSet& features,
                                          int count);

// L2-normalized TF-IDF histogram over visual words, as sorted (word, weight)
// entries.
using SparseHistogram = std::vector<std::pair<word_t, double>>;

class ImageIndex {
 public:
  ImageIndex(const std::map<image_t, FeatureSet>& features,
             const VocabularyTree& vocab, int index_features);

  const std::map<image_t, SparseHistogram>& Histograms() const {
    return histograms_;
  }
  // Cosine similarity of every indexed image with `query` (query excluded).
  std::vector<std::pair<image_t, double>> Score(image_t query) const;

 private:
  std::map<image_t, SparseHistogram> histograms_;
  std::vector<std::vector<std::pair<image_t, double>>> inverted_;
};

// For every image with features, emits its top_k most similar other images
// (score descending, ties by lower id) as deduplicated unordered pairs,
// sorted by (a, b).
std::vector<CandidatePair> RetrievePairs(
    const std::map<image_t, FeatureSet>& features, const VocabularyTree& vocab,
    const RetrievalOptions& options);

}  // namespace psfm
