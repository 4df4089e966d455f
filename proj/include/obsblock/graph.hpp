#pragma once

#include <optional>
#include <vector>

#include "obsblock/linalg.hpp"

namespace obsblock {

/// Directed edge `from -> to`: node `from` influences node `to`. Node ids are
/// 1-based; `weights[k]` couples the k-th derivative states.
struct Edge {
  int from = 0;
  int to = 0;
  std::vector<double> weights;
};

/// Directed graph with one strictly positive weight per derivative order on
/// every edge. Construction validates all invariants and throws on violation.
class WeightedDigraph {
 public:
  WeightedDigraph(int node_count, int order, std::vector<Edge> edges);

  int size() const noexcept { return node_count_; }
  int order() const noexcept { return order_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Undirected neighbourhood of each node (0-based, sorted, unique).
  std::vector<std::vector<int>> undirected_adjacency() const;

 private:
  int node_count_;
  int order_;
  std::vector<Edge> edges_;
};

/// Weighted Laplacian for derivative order k: row `to` carries -w on column
/// `from`, the diagonal makes every row sum to zero.
template <typename Scalar = double>
Mat<Scalar> laplacian(const WeightedDigraph& g, int k);

bool is_strongly_connected(const WeightedDigraph& g);

/// Partition (V1, Vcut, V2) of the nodes. Sets hold sorted 1-based ids.
/// `permutation[i]` is the 0-based original index of the node placed at
/// position i when nodes are renumbered V1 first, then Vcut, then V2.
struct CutsetPlan {
  std::vector<int> v1;
  std::vector<int> vcut;
  std::vector<int> v2;
  std::vector<int> permutation;
};

/// Minimum-cardinality vertex set separating `actuation` from `measurement`
/// (undirected reachability). Actuation nodes are never cut; measurement
/// nodes may be. Among minimum cuts the lexicographically smallest sorted id
/// list is returned.
CutsetPlan min_vertex_cut(const WeightedDigraph& g, const std::vector<int>& actuation,
                          const std::vector<int>& measurement);

/// Builds the plan for a caller-chosen cut. Throws InvalidInput if `vcut`
/// does not separate the two sets.
CutsetPlan plan_from_cut(const WeightedDigraph& g, const std::vector<int>& actuation,
                         const std::vector<int>& measurement, std::vector<int> vcut);

/// Throws InvalidInput when any CutsetPlan invariant fails.
void validate_plan(const WeightedDigraph& g, const CutsetPlan& plan,
                   const std::vector<int>& actuation, const std::vector<int>& measurement);

void check_order(const WeightedDigraph& g, int k);

template <typename Scalar>
Mat<Scalar> laplacian(const WeightedDigraph& g, int k) {
  check_order(g, k);
  Mat<Scalar> lap = Mat<Scalar>::Zero(g.size(), g.size());
  for (const auto& e : g.edges()) {
    const int row = e.to - 1;
    const int col = e.from - 1;
    lap(row, col) -= Scalar(e.weights[k]);
    lap(row, row) += Scalar(e.weights[k]);
  }
  return lap;
}

}  // namespace obsblock
