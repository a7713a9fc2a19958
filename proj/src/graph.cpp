#include "fxtnes/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace fxtnes {

CommGraph::CommGraph(std::size_t n, const std::vector<Edge>& edges) : n_(n) {
  if (n == 0) throw std::invalid_argument("graph needs at least one vertex");
  for (auto [a, b] : edges) {
    if (a >= n || b >= n)
      throw std::invalid_argument("graph edge (" + std::to_string(a + 1) +
                                  "," + std::to_string(b + 1) +
                                  ") references a missing vertex");
    if (a == b)
      throw std::invalid_argument("graph edge (" + std::to_string(a + 1) +
                                  "," + std::to_string(b + 1) +
                                  ") is a self-loop");
    edges_.emplace(std::min(a, b), std::max(a, b));
  }
}

CommGraph CommGraph::complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return CommGraph(n, e);
}

CommGraph CommGraph::path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return CommGraph(n, e);
}

CommGraph CommGraph::from_one_based(std::size_t n,
                                    const std::vector<Edge>& edges) {
  std::vector<Edge> e;
  e.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a == 0 || b == 0)
      throw std::invalid_argument("graph edges use 1-based vertex labels");
    e.emplace_back(a - 1, b - 1);
  }
  return CommGraph(n, e);
}

std::vector<std::size_t> CommGraph::neighbors(std::size_t v) const {
  std::vector<std::size_t> out;
  for (auto [a, b] : edges_) {
    if (a == v) out.push_back(b);
    if (b == v) out.push_back(a);
  }
  return out;
}

Matrix laplacian(const CommGraph& g) {
  const std::size_t n = g.vertices();
  // Integer assembly keeps every row sum exactly zero.
  std::vector<long long> l(n * n, 0);
  for (auto [a, b] : g.edges()) {
    l[a * n + b] -= 1;
    l[b * n + a] -= 1;
    l[a * n + a] += 1;
    l[b * n + b] += 1;
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix out(nn, nn);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(l[i * n + j]);
  return out;
}

bool is_connected(const CommGraph& g) {
  const std::size_t n = g.vertices();
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : g.edges()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop();
    for (auto w : adj[v]) {
      if (seen[w]) continue;
      seen[w] = true;
      ++reached;
      frontier.push(w);
    }
  }
  return reached == n;
}

double fiedler_value(const CommGraph& g) {
  if (g.vertices() < 2) return 0.0;
  return jacobi_eigen(laplacian(g)).values(1);
}

void require_connected(const CommGraph& g) {
  if (!is_connected(g))
    throw GraphAssumptionViolation(
        "communication graph is not connected; every player must be "
        "reachable from every other player");
}

Matrix estimator_coupling(const Matrix& lap) {
  const Eigen::Index n = lap.rows();
  Matrix out = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j) out(i * n + j, k * n + j) = lap(i, k);
  for (Eigen::Index i = 0; i < n; ++i) out(i * n + i, i * n + i) += 1.0;
  return out;
}

Vector estimator_coupling_spectrum(const Matrix& lap) {
  const Eigen::Index n = lap.rows();
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix block = lap;
    block(j, j) += 1.0;
    const auto eig = jacobi_eigen(block);
    all.insert(all.end(), eig.values.begin(), eig.values.end());
  }
  std::sort(all.begin(), all.end());
  return Eigen::Map<Vector>(all.data(), static_cast<Eigen::Index>(all.size()));
}

}  // namespace fxtnes
