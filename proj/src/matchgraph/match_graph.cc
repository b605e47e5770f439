#include "psfm/matchgraph/match_graph.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "psfm/matchgraph/convex_hull.h"
#include "psfm/matchgraph/dataset_io.h"

namespace psfm {

MatchGraph::MatchGraph(std::vector<image_t> vertices,
                       std::vector<GraphEdge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  std::sort(vertices_.begin(), vertices_.end());
  vertices_.erase(std::unique(vertices_.begin(), vertices_.end()),
                  vertices_.end());
  for (const image_t v : vertices_) adjacency_[v];
  for (auto& e : edges_) {
    if (e.a == e.b) throw std::invalid_argument("self-loop in match graph");
    if (e.a > e.b) std::swap(e.a, e.b);
    if (!adjacency_.count(e.a) || !adjacency_.count(e.b)) {
      throw std::invalid_argument("edge references unknown vertex");
    }
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const GraphEdge& x, const GraphEdge& y) {
              return std::tie(x.a, x.b) < std::tie(y.a, y.b);
            });
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (i > 0 && edges_[i].a == edges_[i - 1].a &&
        edges_[i].b == edges_[i - 1].b) {
      throw std::invalid_argument("duplicate edge in match graph");
    }
    adjacency_[edges_[i].a].emplace_back(edges_[i].b, i);
    adjacency_[edges_[i].b].emplace_back(edges_[i].a, i);
  }
  for (auto& [v, adj] : adjacency_) std::sort(adj.begin(), adj.end());
}

const MatchGraph::Adjacency& MatchGraph::Neighbors(image_t id) const {
  const auto it = adjacency_.find(id);
  if (it == adjacency_.end()) {
    throw std::out_of_range("vertex " + std::to_string(id) + " not in graph");
  }
  return it->second;
}

double MatchGraph::WeightedDegree(image_t id) const {
  double sum = 0;
  for (const auto& [n, e] : Neighbors(id)) sum += edges_[e].weight;
  return sum;
}

const GraphEdge* MatchGraph::FindEdge(image_t a, image_t b) const {
  const auto it = adjacency_.find(a);
  if (it == adjacency_.end()) return nullptr;
  const auto& adj = it->second;
  const auto pos = std::lower_bound(
      adj.begin(), adj.end(), b,
      [](const auto& entry, image_t id) { return entry.first < id; });
  if (pos == adj.end() || pos->first != b) return nullptr;
  return &edges_[pos->second];
}

double MatchGraph::EdgeWeight(image_t a, image_t b) const {
  const GraphEdge* e = FindEdge(a, b);
  return e ? e->weight : 0.0;
}

MatchGraph MatchGraph::InducedSubgraph(
    const std::vector<image_t>& subset) const {
  std::set<image_t> keep;
  for (const image_t v : subset) {
    if (HasVertex(v)) keep.insert(v);
  }
  std::vector<GraphEdge> edges;
  for (const auto& e : edges_) {
    if (keep.count(e.a) && keep.count(e.b)) edges.push_back(e);
  }
  return MatchGraph({keep.begin(), keep.end()}, std::move(edges));
}

std::pair<double, double> MatchHullAreas(const MatchPair& pair,
                                         const FeatureSet& features_a,
                                         const FeatureSet& features_b) {
  std::vector<Eigen::Vector2d> pa, pb;
  pa.reserve(pair.matches.size());
  pb.reserve(pair.matches.size());
  for (const auto& m : pair.matches) {
    pa.push_back(features_a.keypoints.at(m.idx_a).xy);
    pb.push_back(features_b.keypoints.at(m.idx_b).xy);
  }
  return {ConvexHullArea(pa), ConvexHullArea(pb)};
}

double EdgeWeightFromTerms(std::size_t n_inlier, std::size_t n_max,
                           double hull_area_a, double hull_area_b,
                           double image_area_a, double image_area_b,
                           double r_ew) {
  if (n_max < 2) throw std::invalid_argument("edge weight needs n_max >= 2");
  if (n_inlier < 2 || n_inlier > n_max) {
    throw std::invalid_argument("edge weight needs 2 <= n_inlier <= n_max");
  }
  if (r_ew < 0 || r_ew > 1) throw std::invalid_argument("r_ew outside [0,1]");
  if (image_area_a + image_area_b <= 0) {
    throw std::invalid_argument("image areas must be positive");
  }
  const double inlier_term =
      std::log(static_cast<double>(n_inlier)) / std::log(static_cast<double>(n_max));
  const double coverage = std::clamp(
      (hull_area_a + hull_area_b) / (image_area_a + image_area_b), 0.0, 1.0);
  return std::clamp(r_ew * inlier_term + (1 - r_ew) * coverage, 0.0, 1.0);
}

double EdgeWeight(const MatchPair& pair, const FeatureSet& features_a,
                  const FeatureSet& features_b, const ImageMeta& meta_a,
                  const ImageMeta& meta_b, std::size_t n_max, double r_ew) {
  const auto [ch_a, ch_b] = MatchHullAreas(pair, features_a, features_b);
  return EdgeWeightFromTerms(pair.InlierCount(), n_max, ch_a, ch_b,
                             meta_a.Area(), meta_b.Area(), r_ew);
}

MatchGraph BuildMatchGraph(const std::vector<MatchPair>& pairs,
                           const Dataset& dataset,
                           const MatchGraphOptions& options) {
  std::vector<image_t> vertices;
  for (const auto& [id, meta] : dataset.images) vertices.push_back(id);

  std::vector<std::size_t> survivors;
  std::size_t n_max = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto n = pairs[i].InlierCount();
    if (n < options.min_matches || n < 2) continue;
    survivors.push_back(i);
    n_max = std::max(n_max, n);
  }
  static const FeatureSet kEmpty;
  auto features_of = [&](image_t id) -> const FeatureSet& {
    const auto it = dataset.features.find(id);
    return it == dataset.features.end() ? kEmpty : it->second;
  };

  std::vector<GraphEdge> edges;
  for (const std::size_t i : survivors) {
    const auto& p = pairs[i];
    GraphEdge e;
    e.a = p.image_id_a;
    e.b = p.image_id_b;
    e.pair_index = i;
    // A lone surviving pair with N_max = N < 2 cannot occur (n >= 2 above),
    // but N_max == 2 with N == 2 is fine: log 2 / log 2 = 1.
    e.weight = EdgeWeight(p, features_of(p.image_id_a),
                          features_of(p.image_id_b),
                          dataset.images.at(p.image_id_a),
                          dataset.images.at(p.image_id_b), n_max, options.r_ew);
    edges.push_back(e);
  }
  return MatchGraph(std::move(vertices), std::move(edges));
}

void WriteMatchGraph(const MatchGraph& graph, std::ostream& out) {
  for (const image_t v : graph.Vertices()) out << "VERTEX " << v << '\n';
  for (const auto& e : graph.Edges()) {
    out << "EDGE " << e.a << ' ' << e.b << ' ' << FormatDouble(e.weight) << ' '
        << e.pair_index << '\n';
  }
}

void WriteMatchGraph(const MatchGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  WriteMatchGraph(graph, out);
}

MatchGraph ReadMatchGraph(std::istream& in) {
  std::vector<image_t> vertices;
  std::vector<GraphEdge> edges;
  std::string line, tag;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ss >> tag;
    if (tag == "VERTEX") {
      image_t v;
      if (!(ss >> v)) throw std::runtime_error("bad VERTEX line");
      vertices.push_back(v);
    } else if (tag == "EDGE") {
      GraphEdge e;
      if (!(ss >> e.a >> e.b >> e.weight >> e.pair_index)) {
        throw std::runtime_error("bad EDGE line");
      }
      edges.push_back(e);
    } else {
      throw std::runtime_error("unknown graph record " + tag);
    }
  }
  return MatchGraph(std::move(vertices), std::move(edges));
}

MatchGraph ReadMatchGraph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ReadMatchGraph(in);
}

}  // namespace psfm
