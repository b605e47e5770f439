#include "psfm/graphalgo/wcds.h"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "psfm/graphalgo/components.h"

namespace psfm {
namespace {

enum class Color { kWhite, kGray, kBlack };

}  // namespace

WcdsResult ExtractWcds(const MatchGraph& graph, double r_vw) {
  if (!(r_vw >= 0 && r_vw <= 1)) {
    throw std::invalid_argument("r_vw must be in [0, 1]");
  }
  WcdsResult result;
  result.r_vw = r_vw;
  if (graph.NumVertices() == 0) return result;

  std::size_t n_max = 0;
  for (const image_t v : graph.Vertices()) n_max = std::max(n_max, graph.Degree(v));

  std::unordered_map<image_t, Color> color;
  std::unordered_map<image_t, std::size_t> white_neighbors;
  for (const image_t v : graph.Vertices()) {
    color[v] = Color::kWhite;
    white_neighbors[v] = graph.Degree(v);
  }
  auto paint = [&](image_t v, Color c) {
    if (color[v] == Color::kWhite) {
      for (const auto& [n, e] : graph.Neighbors(v)) --white_neighbors[n];
    }
    color[v] = c;
  };

  for (const auto& component : ConnectedComponents(graph)) {
    image_t current = component.front();
    for (const image_t v : component) {
      if (white_neighbors[v] > white_neighbors[current]) current = v;
    }
    std::size_t num_white = component.size();
    std::vector<image_t> gray;
    // Strongest edge from each gray vertex to the black set.
    std::unordered_map<image_t, std::size_t> black_edge;
    while (true) {
      if (color[current] == Color::kWhite) --num_white;
      if (color[current] == Color::kGray) {
        result.tree_edges.push_back(graph.Edges()[black_edge.at(current)]);
      }
      paint(current, Color::kBlack);
      result.selected_vertices.push_back(current);
      const auto& edges = graph.Edges();
      for (const auto& [n, e] : graph.Neighbors(current)) {
        if (color[n] == Color::kWhite) {
          paint(n, Color::kGray);
          --num_white;
          gray.push_back(n);
          black_edge[n] = e;
        } else if (color[n] == Color::kGray &&
                   edges[e].weight > edges[black_edge[n]].weight) {
          black_edge[n] = e;
        }
      }
      gray.erase(std::remove(gray.begin(), gray.end(), current), gray.end());
      if (num_white == 0 || gray.empty()) break;

      std::sort(gray.begin(), gray.end());
      double best_score = -1;
      for (const image_t g : gray) {
        // A gray vertex is adjacent to a black one by construction.
        const auto edge = black_edge.find(g);
        if (edge == black_edge.end()) {
          throw std::logic_error("gray vertex without black neighbour");
        }
        const double neighbor_term =
            n_max == 0 ? 0.0
                       : static_cast<double>(white_neighbors[g]) / n_max;
        const double score =
            r_vw * neighbor_term + (1 - r_vw) * graph.Edges()[edge->second].weight;
        if (score > best_score) {
          best_score = score;
          current = g;
        }
      }
    }
  }
  result.induced_subgraph = graph.InducedSubgraph(result.selected_vertices);
  return result;
}

void WriteWcds(const WcdsResult& result, std::ostream& out) {
  out << "WCDS";
  for (const image_t v : result.selected_vertices) out << ' ' << v;
  out << '\n';
}

}  // namespace psfm
