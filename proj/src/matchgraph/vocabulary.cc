#include "psfm/matchgraph/vocabulary.h"

#include <limits>
#include <stdexcept>
#include <string>

#include "psfm/util/random.h"

namespace psfm {
namespace {

std::size_t IntPow(int base, int exp) {
  std::size_t result = 1;
  for (int i = 0; i < exp; ++i) result *= static_cast<std::size_t>(base);
  return result;
}

int Nearest(const std::vector<Eigen::VectorXf>& centroids,
            const Eigen::Ref<const Eigen::VectorXf>& x) {
  int best = 0;
  float best_dist = std::numeric_limits<float>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    const float d = (centroids[c] - x).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::vector<Eigen::VectorXf> KMeans(const DescriptorMatrix& samples,
                                    const std::vector<long>& rows, int k,
                                    int max_iterations, std::uint64_t seed,
                                    std::vector<int>* labels) {
  if (rows.empty() || k <= 0) {
    throw std::invalid_argument("k-means needs samples and k > 0");
  }
  Rng rng(seed);
  const long dim = samples.cols();
  std::vector<Eigen::VectorXf> centroids;
  centroids.reserve(k);

  // k-means++ seeding.
  std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
  centroids.push_back(samples.row(rows[pick(rng)]).transpose());
  std::vector<double> min_dist(rows.size(),
                               std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double d =
          (samples.row(rows[i]).transpose() - centroids.back()).squaredNorm();
      min_dist[i] = std::min(min_dist[i], d);
      total += min_dist[i];
    }
    if (total <= 0) {
      // Fewer distinct samples than k: duplicate.
      centroids.push_back(centroids.back());
      continue;
    }
    std::uniform_real_distribution<double> u(0, total);
    double target = u(rng);
    std::size_t chosen = rows.size() - 1;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      target -= min_dist[i];
      if (target <= 0 && min_dist[i] > 0) {
        chosen = i;
        break;
      }
    }
    centroids.push_back(samples.row(rows[chosen]).transpose());
  }

  std::vector<int> assign(rows.size(), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int c = Nearest(centroids, samples.row(rows[i]).transpose());
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(dim));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sums[assign[i]] += samples.row(rows[i]).transpose().cast<double>();
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      // Empty clusters keep their previous centroid.
      if (counts[c] > 0) centroids[c] = (sums[c] / counts[c]).cast<float>();
    }
  }
  if (labels) *labels = std::move(assign);
  return centroids;
}

VocabularyTree VocabularyTree::Build(const DescriptorMatrix& samples,
                                     const Options& options) {
  if (options.depth < 0 || (options.depth > 0 && options.branching < 2)) {
    throw std::invalid_argument("vocabulary needs branching >= 2");
  }
  const std::size_t leaves = IntPow(options.branching, options.depth);
  if (static_cast<std::size_t>(samples.rows()) < leaves ||
      samples.rows() == 0) {
    throw std::invalid_argument(
        "vocabulary needs at least branching^depth samples (" +
        std::to_string(leaves) + "), got " + std::to_string(samples.rows()));
  }
  VocabularyTree tree;
  tree.depth_ = options.depth;
  tree.branching_ = options.branching;
  tree.dim_ = samples.cols();

  std::vector<long> all(samples.rows());
  for (long i = 0; i < samples.rows(); ++i) all[i] = i;
  Node root;
  root.centroid = samples.colwise().mean().transpose();
  tree.nodes_.push_back(root);
  tree.Split(0, samples, all, 0, options, options.seed);
  return tree;
}

void VocabularyTree::Split(std::size_t node, const DescriptorMatrix& samples,
                           const std::vector<long>& rows, int level,
                           const Options& options, std::uint64_t seed) {
  if (level == options.depth) {
    nodes_[node].word = static_cast<word_t>(num_words_++);
    return;
  }
  const int k = options.branching;
  std::vector<Eigen::VectorXf> centroids;
  std::vector<int> labels;
  if (static_cast<int>(rows.size()) >= k) {
    centroids =
        KMeans(samples, rows, k, options.max_kmeans_iterations, seed, &labels);
  } else {
    // Too few samples: one child per sample, the rest duplicate the parent.
    for (std::size_t i = 0; i < rows.size(); ++i) {
      centroids.push_back(samples.row(rows[i]).transpose());
      labels.push_back(static_cast<int>(i));
    }
    while (static_cast<int>(centroids.size()) < k) {
      centroids.push_back(nodes_[node].centroid);
    }
  }
  const int first = static_cast<int>(nodes_.size());
  nodes_[node].first_child = first;
  for (int c = 0; c < k; ++c) {
    Node child;
    child.centroid = centroids[c];
    nodes_.push_back(child);
  }
  for (int c = 0; c < k; ++c) {
    std::vector<long> child_rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (labels[i] == c) child_rows.push_back(rows[i]);
    }
    Split(first + c, samples, child_rows, level + 1, options,
          seed * 1000003ULL + static_cast<std::uint64_t>(first + c));
  }
}

word_t VocabularyTree::Quantize(
    const Eigen::Ref<const Eigen::VectorXf>& descriptor) const {
  if (descriptor.size() != dim_) {
    throw std::invalid_argument("descriptor dimension mismatch");
  }
  std::size_t node = 0;
  while (nodes_[node].first_child >= 0) {
    const int first = nodes_[node].first_child;
    int best = 0;
    float best_dist = std::numeric_limits<float>::infinity();
    for (int c = 0; c < branching_; ++c) {
      const float d = (nodes_[first + c].centroid - descriptor).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        best = c;
      }
    }
    node = first + best;
  }
  return nodes_[node].word;
}

std::vector<word_t> VocabularyTree::QuantizeAll(
    const DescriptorMatrix& descriptors) const {
  std::vector<word_t> words(descriptors.rows());
  for (long i = 0; i < descriptors.rows(); ++i) {
    words[i] = Quantize(descriptors.row(i).transpose());
  }
  return words;
}

std::vector<Eigen::VectorXf> VocabularyTree::LeafCentroids() const {
  std::vector<Eigen::VectorXf> out(num_words_);
  for (const auto& node : nodes_) {
    if (node.first_child < 0) out[node.word] = node.centroid;
  }
  return out;
}

DescriptorMatrix SampleDescriptors(const Dataset& dataset,
                                   std::size_t max_samples,
                                   std::uint64_t seed) {
  std::vector<std::pair<image_t, long>> refs;
  long dim = 0;
  for (const auto& [id, fs] : dataset.features) {
    if (!fs.HasDescriptors()) continue;
    dim = fs.descriptors.cols();
    for (long i = 0; i < fs.descriptors.rows(); ++i) refs.emplace_back(id, i);
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  if (refs.size() <= max_samples) {
    chosen.resize(refs.size());
    for (std::size_t i = 0; i < refs.size(); ++i) chosen[i] = i;
  } else {
    chosen = SampleDistinct(refs.size(), max_samples, rng);
  }
  DescriptorMatrix out(static_cast<long>(chosen.size()), dim);
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    const auto& [id, i] = refs[chosen[r]];
    out.row(static_cast<long>(r)) = dataset.features.at(id).descriptors.row(i);
  }
  return out;
}

}  // namespace psfm
