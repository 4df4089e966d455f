#pragma once

#include <vector>

#include "obsblock/graph.hpp"
#include "obsblock/linalg.hpp"

namespace obsblock {

/// Order-N integrator network: node i carries s_i and its first N-1
/// derivatives. State ordering is all positions, then all first derivatives,
/// and so on.
struct IntegratorNetwork {
  WeightedDigraph graph;
  std::vector<int> actuation;    // r_1..r_q, 1-based
  std::vector<int> measurement;  // r'_1..r'_m, 1-based
  std::vector<MatR> laplacians;  // one n x n coupling matrix per derivative order
  bool laplacian_form = true;    // false when `laplacians` were supplied directly

  int order() const { return static_cast<int>(laplacians.size()); }
  int nodes() const { return graph.size(); }
  int state_dim() const { return order() * nodes(); }
  int inputs() const { return static_cast<int>(actuation.size()); }
  int outputs_per_block() const { return static_cast<int>(measurement.size()); }
};

/// Builds the network with Laplacians derived from the graph weights.
IntegratorNetwork make_network(WeightedDigraph graph, std::vector<int> actuation,
                               std::vector<int> measurement);

/// Builds the network with caller-supplied coupling matrices (need not be
/// Laplacians). The graph still fixes node count and cut topology.
IntegratorNetwork make_network(WeightedDigraph graph, std::vector<int> actuation,
                               std::vector<int> measurement, std::vector<MatR> couplings);

/// Relabels nodes: new node i+1 is old node perm[i] + 1.
IntegratorNetwork permute_network(const IntegratorNetwork& net, const std::vector<int>& perm);

struct StateSpace {
  MatR A;
  MatR B;
  MatR C;
};

/// Companion-block A, input matrix [0; ...; 0; B_hat] and block-diagonal C.
StateSpace assemble(const IntegratorNetwork& net);

/// Block-diagonal selector with `order` copies of [e_{id_1} ... e_{id_k}]^T.
MatR selector_output(int nodes, int order, const std::vector<int>& ids);

/// Output matrix that measures every derivative of the cut nodes.
MatR cutset_output(const IntegratorNetwork& net, const CutsetPlan& plan);

/// State index of derivative `block` of 1-based node `id`.
inline int state_index(int nodes, int block, int id) { return block * nodes + id - 1; }

/// A + B F.
template <typename DA, typename DB, typename DF>
typename DA::PlainObject closed_loop(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B,
                                     const Eigen::MatrixBase<DF>& F);

}  // namespace obsblock

#include "obsblock/error.hpp"

namespace obsblock {

template <typename DA, typename DB, typename DF>
typename DA::PlainObject closed_loop(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B,
                                     const Eigen::MatrixBase<DF>& F) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || F.rows() != B.cols() ||
      F.cols() != A.cols()) {
    throw Error(ErrorKind::ModelAssembly, "closed_loop: dimension mismatch");
  }
  typename DA::PlainObject out = A;
  out.noalias() += B * F;
  return out;
}

}  // namespace obsblock
