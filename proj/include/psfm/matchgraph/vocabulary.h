#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "psfm/matchgraph/dataset.h"

namespace psfm {

using word_t = std::uint32_t;

// Hierarchical k-means tree. Leaves are visual words numbered in
// depth-first order, so a tree of branching b and depth L has exactly b^L
// words. Nodes that run out of samples duplicate their parent centroid;
// such duplicates are never chosen because ties quantize to the lowest
// child index.
class VocabularyTree {
 public:
  struct Options {
    int branching = 8;
    int depth = 3;
    int max_kmeans_iterations = 50;
    std::uint64_t seed = 0;
  };

  // Throws std::invalid_argument if samples.rows() < branching^depth.
  static VocabularyTree Build(const DescriptorMatrix& samples,
                              const Options& options);

  std::size_t NumWords() const { return num_words_; }
  int Depth() const { return depth_; }
  int Branching() const { return branching_; }
  long Dimension() const { return dim_; }

  word_t Quantize(const Eigen::Ref<const Eigen::VectorXf>& descriptor) const;
  std::vector<word_t> QuantizeAll(const DescriptorMatrix& descriptors) const;

  // Centroid of each leaf word.
  std::vector<Eigen::VectorXf> LeafCentroids() const;

 private:
  struct Node {
    Eigen::VectorXf centroid;
    int first_child = -1;  // children are contiguous
    word_t word = 0;       // valid for leaves
  };

  void Split(std::size_t node, const DescriptorMatrix& samples,
             const std::vector<long>& rows, int level, const Options& options,
             std::uint64_t seed);

  std::vector<Node> nodes_;
  std::size_t num_words_ = 0;
  int depth_ = 0;
  int branching_ = 0;
  long dim_ = 0;
};

// Plain Lloyd k-means with k-means++ seeding over the given rows.
// Returns k centroids; labels (if given) receive the assignment per row.
std::vector<Eigen::VectorXf> KMeans(const DescriptorMatrix& samples,
                                    const std::vector<long>& rows, int k,
                                    int max_iterations, std::uint64_t seed,
                                    std::vector<int>* labels = nullptr);

// Uniform random subset of all descriptors in the dataset, at most
// max_samples rows.
DescriptorMatrix SampleDescriptors(const Dataset& dataset,
                                   std::size_t max_samples,
                                   std::uint64_t seed);

}  // namespace psfm
