#include "psfm/graphalgo/normalized_cut.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Eigenvalues>

#include "psfm/graphalgo/components.h"

namespace psfm {
namespace {

// Weighted adjacency of an induced subgraph, in local indices.
struct LocalGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  Eigen::VectorXd degree;

  LocalGraph(const MatchGraph& graph, const std::vector<image_t>& vertices,
             double min_weight) {
    std::unordered_map<image_t, int> local;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      local[vertices[i]] = static_cast<int>(i);
    }
    adj.resize(vertices.size());
    degree = Eigen::VectorXd::Zero(static_cast<long>(vertices.size()));
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      for (const auto& [n, e] : graph.Neighbors(vertices[i])) {
        const auto it = local.find(n);
        if (it == local.end()) continue;
        const double w = std::max(graph.Edges()[e].weight, min_weight);
        adj[i].emplace_back(it->second, w);
        degree(static_cast<long>(i)) += w;
      }
    }
  }

  int Size() const { return static_cast<int>(adj.size()); }

  // y = D^-1/2 W D^-1/2 x
  Eigen::VectorXd NormalizedAdjacencyTimes(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& inv_sqrt) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
    for (int i = 0; i < Size(); ++i) {
      double acc = 0;
      for (const auto& [j, w] : adj[i]) acc += w * inv_sqrt(j) * x(j);
      y(i) = inv_sqrt(i) * acc;
    }
    return y;
  }
};

// Eigenvector of the second largest eigenvalue of S = D^-1/2 W D^-1/2, i.e.
// the second smallest of the normalized Laplacian I - S. The top
// eigenvector D^1/2 1 is known and projected out; Lanczos with full
// reorthogonalization then finds the largest eigenpair of the shifted
// operator S + I on the complement (all eigenvalues of S + I are >= 0).
Eigen::VectorXd LanczosSecondVector(const LocalGraph& g,
                                    const Eigen::VectorXd& inv_sqrt,
                                    const Eigen::VectorXd& top,
                                    double tolerance) {
  const int n = g.Size();
  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = g.NormalizedAdjacencyTimes(x, inv_sqrt) + x;
    y -= top * top.dot(y);
    return y;
  };
  Eigen::VectorXd start(n);
  for (int i = 0; i < n; ++i) start(i) = std::sin(1.0 + 12.9898 * i);
  start -= top * top.dot(start);

  const int max_steps = std::min(n - 1, 200);
  Eigen::VectorXd ritz = start.normalized();
  for (int restart = 0; restart < 50; ++restart) {
    std::vector<Eigen::VectorXd> basis;
    std::vector<double> alpha, beta;
    Eigen::VectorXd q = ritz;
    for (int k = 0; k < max_steps; ++k) {
      basis.push_back(q);
      Eigen::VectorXd w = apply(q);
      alpha.push_back(q.dot(w));
      // Full reorthogonalization, twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) w -= b * b.dot(w);
        w -= top * top.dot(w);
      }
      const double b = w.norm();
      if (b < 1e-12) break;
      beta.push_back(b);
      q = w / b;
    }
    const int m = static_cast<int>(basis.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const Eigen::VectorXd s = eig.eigenvectors().col(m - 1);
    ritz = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) ritz += s(i) * basis[i];
    ritz.normalize();
    const double theta = eig.eigenvalues()(m - 1);
    const double residual = (apply(ritz) - theta * ritz).norm();
    if (residual < tolerance * std::max(1.0, std::abs(theta))) break;
  }
  return ritz;
}

}  // namespace

double NcutValue(const MatchGraph& graph, const std::vector<image_t>& part_a,
                 const std::vector<image_t>& part_b, double min_weight) {
  const std::unordered_set<image_t> in_a(part_a.begin(), part_a.end());
  const std::unordered_set<image_t> in_b(part_b.begin(), part_b.end());
  double cut = 0, assoc_a = 0, assoc_b = 0;
  for (const auto& e : graph.Edges()) {
    const double w = std::max(e.weight, min_weight);
    const bool a1 = in_a.count(e.a), a2 = in_a.count(e.b);
    const bool b1 = in_b.count(e.a), b2 = in_b.count(e.b);
    if (!(a1 || b1) || !(a2 || b2)) continue;
    if (a1) assoc_a += w;
    if (a2) assoc_a += w;
    if (b1) assoc_b += w;
    if (b2) assoc_b += w;
    if (a1 != a2) cut += w;
  }
  if (assoc_a <= 0 || assoc_b <= 0) return std::numeric_limits<double>::infinity();
  return cut / assoc_a + cut / assoc_b;
}

Eigen::VectorXd FiedlerVector(const MatchGraph& graph,
                              const std::vector<image_t>& vertices,
                              const NormalizedCutOptions& options) {
  const LocalGraph g(graph, vertices, options.min_weight);
  const int n = g.Size();
  if (n < 2) return Eigen::VectorXd::Zero(n);
  Eigen::VectorXd inv_sqrt(n), top(n);
  for (int i = 0; i < n; ++i) {
    if (g.degree(i) <= 0) throw std::invalid_argument("subgraph not connected");
    inv_sqrt(i) = 1.0 / std::sqrt(g.degree(i));
    top(i) = std::sqrt(g.degree(i));
  }
  top.normalize();

  Eigen::VectorXd v;
  if (static_cast<std::size_t>(n) < options.dense_limit) {
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (const auto& [j, w] : g.adj[i]) {
        laplacian(i, j) -= w * inv_sqrt(i) * inv_sqrt(j);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
    v = eig.eigenvectors().col(1);
  } else {
    v = LanczosSecondVector(g, inv_sqrt, top, options.eigen_tolerance);
  }
  Eigen::VectorXd y = v.cwiseProduct(inv_sqrt);
  // Fix the sign so results do not depend on the solver: the entry with the
  // largest magnitude (lowest index on ties) is positive.
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < y.size(); ++i) {
    if (std::abs(y(i)) > std::abs(y(arg)) + 1e-12) arg = i;
  }
  if (y(arg) < 0) y = -y;
  return y;
}

Bisection SpectralBisect(const MatchGraph& graph,
                         const std::vector<image_t>& vertices,
                         const NormalizedCutOptions& options) {
  const Eigen::VectorXd y = FiedlerVector(graph, vertices, options);
  const int n = static_cast<int>(vertices.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (y(a) != y(b)) return y(a) < y(b);
    return vertices[a] < vertices[b];
  });

  // Sweep the split point, updating cut and volumes incrementally.
  const LocalGraph g(graph, vertices, options.min_weight);
  const double total = g.degree.sum();
  std::vector<char> in_a(n, 0);
  double cut = 0, vol_a = 0;
  double best = std::numeric_limits<double>::infinity();
  int best_split = 1;
  for (int k = 0; k + 1 < n; ++k) {
    const int v = order[k];
    in_a[v] = 1;
    vol_a += g.degree(v);
    for (const auto& [j, w] : g.adj[v]) cut += in_a[j] ? -w : w;
    const double vol_b = total - vol_a;
    if (vol_a <= 0 || vol_b <= 0) continue;
    const double ncut = cut / vol_a + cut / vol_b;
    if (ncut < best) {
      best = ncut;
      best_split = k + 1;
    }
  }
  Bisection out;
  for (int k = 0; k < n; ++k) {
    (k < best_split ? out.part_a : out.part_b).push_back(vertices[order[k]]);
  }
  std::sort(out.part_a.begin(), out.part_a.end());
  std::sort(out.part_b.begin(), out.part_b.end());
  out.ncut = best;
  return out;
}

Clustering NormalizedCut(const MatchGraph& graph,
                         const NormalizedCutOptions& options) {
  if (options.max_size < 2) throw std::invalid_argument("max_size must be >= 2");
  Clustering result;
  result.max_size = options.max_size;
  std::vector<std::vector<image_t>> pending = ConnectedComponents(graph);
  while (!pending.empty()) {
    std::vector<image_t> part = std::move(pending.back());
    pending.pop_back();
    if (part.size() <= options.max_size) {
      result.clusters.push_back(std::move(part));
      continue;
    }
    const Bisection split = SpectralBisect(graph, part, options);
    for (const auto* side : {&split.part_a, &split.part_b}) {
      for (auto& component : ConnectedComponents(graph, *side)) {
        pending.push_back(std::move(component));
      }
    }
  }
  std::sort(result.clusters.begin(), result.clusters.end());
  return result;
}

void WriteClustering(const Clustering& clustering, std::ostream& out) {
  for (std::size_t k = 0; k < clustering.clusters.size(); ++k) {
    out << "CLUSTER " << k << ':';
    for (const image_t v : clustering.clusters[k]) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace psfm
