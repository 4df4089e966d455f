#include "obsblock/model.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "obsblock/error.hpp"

namespace obsblock {

namespace {

void check_node_list(const std::vector<int>& ids, int n, const char* what) {
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InvalidInput, fmt::format("duplicate {} node", what));
  }
  for (int id : ids) {
    if (id < 1 || id > n) {
      throw Error(ErrorKind::InvalidInput, fmt::format("{} node {} outside 1..{}", what, id, n));
    }
  }
}

void validate(const IntegratorNetwork& net) {
  const int n = net.nodes();
  if (net.order() < 2) throw Error(ErrorKind::OrderMismatch, "integrator networks need order >= 2");
  if (net.order() != net.graph.order()) {
    throw Error(ErrorKind::OrderMismatch,
                fmt::format("{} coupling matrices for a graph of order {}", net.order(),
                            net.graph.order()));
  }
  for (const auto& L : net.laplacians) {
    if (L.rows() != n || L.cols() != n) {
      throw Error(ErrorKind::ModelAssembly,
                  fmt::format("coupling matrix is {}x{}, expected {}x{}", L.rows(), L.cols(), n, n));
    }
    if (!L.allFinite()) throw Error(ErrorKind::ModelAssembly, "coupling matrix has non-finite entries");
  }
  check_node_list(net.actuation, n, "actuation");
  check_node_list(net.measurement, n, "measurement");
  for (int a : net.actuation) {
    if (std::find(net.measurement.begin(), net.measurement.end(), a) != net.measurement.end()) {
      throw Error(ErrorKind::InvalidInput,
                  fmt::format("node {} is both actuation and measurement", a));
    }
  }
}

}  // namespace

IntegratorNetwork make_network(WeightedDigraph graph, std::vector<int> actuation,
                               std::vector<int> measurement) {
  std::vector<MatR> laps;
  for (int k = 0; k < graph.order(); ++k) laps.push_back(laplacian(graph, k));
  IntegratorNetwork net{std::move(graph), std::move(actuation), std::move(measurement),
                        std::move(laps), true};
  validate(net);
  return net;
}

IntegratorNetwork make_network(WeightedDigraph graph, std::vector<int> actuation,
                               std::vector<int> measurement, std::vector<MatR> couplings) {
  IntegratorNetwork net{std::move(graph), std::move(actuation), std::move(measurement),
                        std::move(couplings), false};
  validate(net);
  return net;
}

IntegratorNetwork permute_network(const IntegratorNetwork& net, const std::vector<int>& perm) {
  const int n = net.nodes();
  if (static_cast<int>(perm.size()) != n) {
    throw Error(ErrorKind::InvalidInput, "permutation length differs from node count");
  }
  std::vector<int> new_id(n, 0);
  for (int i = 0; i < n; ++i) new_id.at(perm[i]) = i + 1;
  if (std::count(new_id.begin(), new_id.end(), 0) != 0) {
    throw Error(ErrorKind::InvalidInput, "not a permutation");
  }
  std::vector<Edge> edges;
  for (const auto& e : net.graph.edges()) {
    edges.push_back({new_id[e.from - 1], new_id[e.to - 1], e.weights});
  }
  auto relabel = [&](const std::vector<int>& ids) {
    std::vector<int> out;
    for (int id : ids) out.push_back(new_id[id - 1]);
    return out;
  };
  WeightedDigraph g(n, net.graph.order(), std::move(edges));
  if (net.laplacian_form) {
    return make_network(std::move(g), relabel(net.actuation), relabel(net.measurement));
  }
  std::vector<MatR> couplings;
  for (const auto& L : net.laplacians) {
    MatR P(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) P(i, j) = L(perm[i], perm[j]);
    couplings.push_back(std::move(P));
  }
  return make_network(std::move(g), relabel(net.actuation), relabel(net.measurement),
                      std::move(couplings));
}

StateSpace assemble(const IntegratorNetwork& net) {
  validate(net);
  const int n = net.nodes();
  const int N = net.order();
  const int dim = N * n;
  StateSpace ss;
  ss.A = MatR::Zero(dim, dim);
  for (int k = 0; k + 1 < N; ++k) ss.A.block(k * n, (k + 1) * n, n, n).setIdentity();
  for (int k = 0; k < N; ++k) ss.A.block((N - 1) * n, k * n, n, n) = -net.laplacians[k];

  ss.B = MatR::Zero(dim, net.inputs());
  for (int i = 0; i < net.inputs(); ++i) ss.B((N - 1) * n + net.actuation[i] - 1, i) = 1.0;

  ss.C = selector_output(n, N, net.measurement);
  return ss;
}

MatR selector_output(int nodes, int order, const std::vector<int>& ids) {
  const int m = static_cast<int>(ids.size());
  MatR C = MatR::Zero(order * m, order * nodes);
  for (int k = 0; k < order; ++k) {
    for (int i = 0; i < m; ++i) C(k * m + i, state_index(nodes, k, ids[i])) = 1.0;
  }
  return C;
}

MatR cutset_output(const IntegratorNetwork& net, const CutsetPlan& plan) {
  return selector_output(net.nodes(), net.order(), plan.vcut);
}

}  // namespace obsblock
