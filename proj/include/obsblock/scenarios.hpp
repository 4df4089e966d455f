#pragma once

#include <cstdint>

#include "obsblock/model.hpp"

namespace obsblock {

/// Eleven-node undirected network in which node 5 is the only single-node
/// separator between {1,2,3,4,10} and {6,7,8,9,11}. Actuation {1,10},
/// measurement {6,8,9,11}. Weights are drawn from `seed`: position weights
/// in [0.05, 0.3], higher-derivative weights in [1.5, 3.0], symmetric per edge.
IntegratorNetwork fig2_network(std::uint64_t seed, int order = 2);

/// Random directed graph: every ordered pair is an edge with probability
/// `density`, weights uniform in [0.5, 1.5]. Redraws until strongly
/// connected; throws InvalidInput after `max_tries` failures.
WeightedDigraph random_digraph(int nodes, int order, double density, std::uint64_t seed,
                               int max_tries = 1000);

/// Random strongly connected network with `m` measurement and `q` actuation
/// nodes chosen disjointly.
IntegratorNetwork random_network(int nodes, int order, int m, int q, double density,
                                 std::uint64_t seed);

}  // namespace obsblock
