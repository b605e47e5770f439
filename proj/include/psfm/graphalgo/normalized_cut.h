#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "psfm/matchgraph/match_graph.h"

namespace psfm {

struct Clustering {
  // Disjoint, each sorted; ordered by smallest id.
  std::vector<std::vector<image_t>> clusters;
  std::size_t max_size = 0;
};

struct NormalizedCutOptions {
  std::size_t max_size = 40;
  // Parts with at least this many vertices use the Lanczos solver instead
  // of a dense eigendecomposition.
  std::size_t dense_limit = 512;
  double eigen_tolerance = 1e-8;
  // Edge weights are floored so that zero-weight edges keep parts connected.
  double min_weight = 1e-9;
};

// Bisection of one connected vertex set.
struct Bisection {
  std::vector<image_t> part_a;  // vertices with the smaller eigenvector values
  std::vector<image_t> part_b;
  double ncut = 0;
};

// Ncut(A, B) = cut(A,B)/assoc(A,V) + cut(A,B)/assoc(B,V) on the subgraph
// induced by A u B.
double NcutValue(const MatchGraph& graph, const std::vector<image_t>& part_a,
                 const std::vector<image_t>& part_b, double min_weight = 1e-9);

// Second eigenvector of the normalized Laplacian, mapped back by D^-1/2,
// in the order of `vertices`. The subgraph must be connected.
Eigen::VectorXd FiedlerVector(const MatchGraph& graph,
                              const std::vector<image_t>& vertices,
                              const NormalizedCutOptions& options);

// Sorts vertices by (Fiedler value, id) and returns the split with the
// minimum Ncut (ties to the earliest split).
Bisection SpectralBisect(const MatchGraph& graph,
                         const std::vector<image_t>& vertices,
                         const NormalizedCutOptions& options);

// Recursive spectral bisection until every cluster has at most max_size
// vertices. Clusters are always connected; disconnected parts are split into
// components first. Throws std::invalid_argument if max_size < 2.
Clustering NormalizedCut(const MatchGraph& graph,
                         const NormalizedCutOptions& options);

// `CLUSTER k: id id ...` per cluster.
void WriteClustering(const Clustering& clustering, std::ostream& out);

}  // namespace psfm
