#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fxtnes/linalg.hpp"

namespace fxtnes {

class GraphAssumptionViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Undirected communication graph over players 0..n-1.
class CommGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  /// Edges are 0-based; stored as (min, max). Self-loops and out-of-range
  /// vertices throw std::invalid_argument. Duplicates collapse.
  CommGraph(std::size_t n, const std::vector<Edge>& edges);

  static CommGraph complete(std::size_t n);
  static CommGraph path(std::size_t n);
  /// Edge list with 1-based vertex labels, as written in config documents.
  static CommGraph from_one_based(std::size_t n,
                                  const std::vector<Edge>& edges);

  std::size_t vertices() const { return n_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::vector<std::size_t> neighbors(std::size_t v) const;

 private:
  std::size_t n_;
  std::set<Edge> edges_;
};

/// L = D - A.
Matrix laplacian(const CommGraph& g);

/// Breadth-first search from vertex 0.
bool is_connected(const CommGraph& g);

/// Second-smallest Laplacian eigenvalue.
double fiedler_value(const CommGraph& g);

/// Throws GraphAssumptionViolation unless the graph is connected.
void require_connected(const CommGraph& g);

/// The estimator coupling L (x) I_N + B acting on row-stacked x (x_ij at
/// index i*N + j), with B = diag of the indicator i == j.
Matrix estimator_coupling(const Matrix& laplacian);

/// Eigenvalues of L (x) I_N + B. The operator splits by column j into
/// L + e_j e_j^T, so this diagonalizes N blocks of size N rather than one
/// of size N^2. Ascending.
Vector estimator_coupling_spectrum(const Matrix& laplacian);

}  // namespace fxtnes
