#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "psfm/matchgraph/dataset.h"

namespace psfm {

struct GraphEdge {
  image_t a = 0;  // a < b
  image_t b = 0;
  double weight = 0;
  // Index into the MatchPair list the graph was built from.
  std::size_t pair_index = 0;
};

// Undirected weighted graph over image ids. Immutable after construction.
class MatchGraph {
 public:
  using Adjacency = std::vector<std::pair<image_t, std::size_t>>;

  MatchGraph() = default;
  // Edges are canonicalized (a < b); duplicate pairs and self-loops throw.
  MatchGraph(std::vector<image_t> vertices, std::vector<GraphEdge> edges);

  const std::vector<image_t>& Vertices() const { return vertices_; }
  const std::vector<GraphEdge>& Edges() const { return edges_; }
  std::size_t NumVertices() const { return vertices_.size(); }
  std::size_t NumEdges() const { return edges_.size(); }
  bool HasVertex(image_t id) const { return adjacency_.count(id) > 0; }

  // (neighbor, edge index) sorted by neighbor id.
  const Adjacency& Neighbors(image_t id) const;
  std::size_t Degree(image_t id) const { return Neighbors(id).size(); }
  double WeightedDegree(image_t id) const;
  const GraphEdge* FindEdge(image_t a, image_t b) const;
  bool HasEdge(image_t a, image_t b) const { return FindEdge(a, b) != nullptr; }
  // 0 when there is no edge.
  double EdgeWeight(image_t a, image_t b) const;

  // Vertices in `subset` that exist in this graph, with all edges among them.
  MatchGraph InducedSubgraph(const std::vector<image_t>& subset) const;

 private:
  std::vector<image_t> vertices_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<image_t, Adjacency> adjacency_;
};

// Convex hull areas (pixels^2) of the matched keypoints in each image.
std::pair<double, double> MatchHullAreas(const MatchPair& pair,
                                         const FeatureSet& features_a,
                                         const FeatureSet& features_b);

// w = r_ew * log(N) / log(N_max) + (1 - r_ew) * (CH_a + CH_b) / (A_a + A_b).
// Throws std::invalid_argument if n_max < 2, n_inlier < 2 or n_inlier > n_max.
double EdgeWeightFromTerms(std::size_t n_inlier, std::size_t n_max,
                           double hull_area_a, double hull_area_b,
                           double image_area_a, double image_area_b,
                           double r_ew);

double EdgeWeight(const MatchPair& pair, const FeatureSet& features_a,
                  const FeatureSet& features_b, const ImageMeta& meta_a,
                  const ImageMeta& meta_b, std::size_t n_max, double r_ew);

struct MatchGraphOptions {
  // Pairs with fewer inliers get no edge; exactly min_matches is kept.
  std::size_t min_matches = 50;
  double r_ew = 0.5;
};

// Every dataset image becomes a vertex. N_max is taken over the pairs that
// survive the min_matches filter.
MatchGraph BuildMatchGraph(const std::vector<MatchPair>& pairs,
                           const Dataset& dataset,
                           const MatchGraphOptions& options);

// `VERTEX id` and `EDGE a b weight pair_index` lines.
void WriteMatchGraph(const MatchGraph& graph, std::ostream& out);
void WriteMatchGraph(const MatchGraph& graph, const std::string& path);
MatchGraph ReadMatchGraph(std::istream& in);
MatchGraph ReadMatchGraph(const std::string& path);

}  // namespace psfm
