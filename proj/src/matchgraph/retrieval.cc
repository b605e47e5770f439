#include "psfm/matchgraph/retrieval.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "psfm/util/parallel.h"

namespace psfm {

std::vector<std::size_t> TopScaleFeatures(const FeatureSet& features,
                                          int count) {
  std::vector<std::size_t> order(features.keypoints.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return features.keypoints[a].scale >
                            features.keypoints[b].scale;
                   });
  if (count >= 0 && order.size() > static_cast<std::size_t>(count)) {
    order.resize(count);
  }
  return order;
}

ImageIndex::ImageIndex(const std::map<image_t, FeatureSet>& features,
                       const VocabularyTree& vocab, int index_features) {
  std::map<image_t, std::map<word_t, double>> counts;
  for (const auto& [id, fs] : features) {
    if (!fs.HasDescriptors() || fs.keypoints.empty()) continue;
    auto& hist = counts[id];
    for (const std::size_t idx : TopScaleFeatures(fs, index_features)) {
      const long row = static_cast<long>(idx);
      hist[vocab.Quantize(fs.descriptors.row(row).transpose())] += 1;
    }
  }

  // Document frequency per word. The smoothed idf log(1 + N/n) keeps words
  // that occur in every image from vanishing on tiny datasets.
  std::vector<std::size_t> doc_freq(vocab.NumWords(), 0);
  for (const auto& [id, hist] : counts) {
    for (const auto& [word, c] : hist) ++doc_freq[word];
  }
  const double num_docs = static_cast<double>(counts.size());
  inverted_.assign(vocab.NumWords(), {});
  for (const auto& [id, hist] : counts) {
    double total = 0;
    for (const auto& [word, c] : hist) total += c;
    SparseHistogram vec;
    double norm2 = 0;
    for (const auto& [word, c] : hist) {
      const double w = (c / total) * std::log(1.0 + num_docs / doc_freq[word]);
      vec.emplace_back(word, w);
      norm2 += w * w;
    }
    const double norm = std::sqrt(norm2);
    for (auto& [word, w] : vec) {
      w /= norm;
      inverted_[word].emplace_back(id, w);
    }
    histograms_[id] = std::move(vec);
  }
}

std::vector<std::pair<image_t, double>> ImageIndex::Score(image_t query) const {
  std::map<image_t, double> acc;
  for (const auto& [id, hist] : histograms_) {
    if (id != query) acc[id] = 0;
  }
  const auto it = histograms_.find(query);
  if (it == histograms_.end()) return {};
  for (const auto& [word, w] : it->second) {
    for (const auto& [other, w_other] : inverted_[word]) {
      if (other != query) acc[other] += w * w_other;
    }
  }
  return {acc.begin(), acc.end()};
}

std::vector<CandidatePair> RetrievePairs(
    const std::map<image_t, FeatureSet>& features, const VocabularyTree& vocab,
    const RetrievalOptions& options) {
  const ImageIndex index(features, vocab, options.index_features);
  std::vector<image_t> queries;
  for (const auto& [id, hist] : index.Histograms()) queries.push_back(id);

  std::vector<std::vector<std::pair<image_t, double>>> ranked(queries.size());
  ParallelFor(queries.size(), options.num_workers, [&](std::size_t q) {
    auto scores = index.Score(queries[q]);
    std::stable_sort(scores.begin(), scores.end(),
                     [](const auto& a, const auto& b) {
                       return a.second > b.second;
                     });
    if (scores.size() > static_cast<std::size_t>(std::max(0, options.top_k))) {
      scores.resize(std::max(0, options.top_k));
    }
    ranked[q] = std::move(scores);
  });

  std::map<std::pair<image_t, image_t>, double> pairs;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (const auto& [other, score] : ranked[q]) {
      const auto key = std::minmax(queries[q], other);
      auto [it, inserted] = pairs.emplace(key, score);
      if (!inserted) it->second = std::max(it->second, score);
    }
  }
  std::vector<CandidatePair> out;
  out.reserve(pairs.size());
  for (const auto& [key, score] : pairs) {
    out.push_back({key.first, key.second, score});
  }
  return out;
}

}  // namespace psfm
