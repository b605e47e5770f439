#include "psfm/graphalgo/components.h"

#include <algorithm>
#include <unordered_set>

namespace psfm {

std::vector<std::vector<image_t>> ConnectedComponents(
    const MatchGraph& graph, const std::vector<image_t>& vertices) {
  std::unordered_set<image_t> allowed(vertices.begin(), vertices.end());
  std::unordered_set<image_t> visited;
  std::vector<image_t> order(vertices);
  std::sort(order.begin(), order.end());
  std::vector<std::vector<image_t>> components;
  for (const image_t start : order) {
    if (visited.count(start)) continue;
    std::vector<image_t> component;
    std::vector<image_t> stack = {start};
    visited.insert(start);
    while (!stack.empty()) {
      const image_t v = stack.back();
      stack.pop_back();
      component.push_back(v);
      for (const auto& [n, e] : graph.Neighbors(v)) {
        if (allowed.count(n) && visited.insert(n).second) stack.push_back(n);
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

std::vector<std::vector<image_t>> ConnectedComponents(const MatchGraph& graph) {
  return ConnectedComponents(graph, graph.Vertices());
}

bool IsConnected(const MatchGraph& graph, const std::vector<image_t>& vertices) {
  return ConnectedComponents(graph, vertices).size() <= 1;
}

}  // namespace psfm
