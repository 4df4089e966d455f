#include "obsblock/scenarios.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "obsblock/error.hpp"

namespace obsblock {

IntegratorNetwork fig2_network(std::uint64_t seed, int order) {
  static constexpr int kLinks[][2] = {
      {1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}, {3, 10}, {4, 10}, {4, 5}, {10, 5},
      {5, 6}, {5, 7}, {6, 7}, {6, 8}, {7, 8}, {8, 9}, {7, 11}, {9, 11},
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.05, 0.3);
  std::uniform_real_distribution<double> higher(1.5, 3.0);
  std::vector<Edge> edges;
  for (const auto& link : kLinks) {
    std::vector<double> w(order);
    w[0] = pos(rng);
    for (int k = 1; k < order; ++k) w[k] = higher(rng);
    edges.push_back({link[0], link[1], w});
    edges.push_back({link[1], link[0], w});
  }
  return make_network(WeightedDigraph(11, order, std::move(edges)), {1, 10}, {6, 8, 9, 11});
}

WeightedDigraph random_digraph(int nodes, int order, double density, std::uint64_t seed,
                               int max_tries) {
  if (nodes < 2) throw Error(ErrorKind::InvalidInput, "random graphs need at least two nodes");
  if (!(density > 0.0 && density <= 1.0)) {
    throw Error(ErrorKind::InvalidInput, fmt::format("density {} outside (0, 1]", density));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    std::vector<Edge> edges;
    for (int i = 1; i <= nodes; ++i) {
      for (int j = 1; j <= nodes; ++j) {
        if (i == j) continue;
        const bool present = density >= 1.0 || coin(rng) < density;
        if (!present) continue;
        std::vector<double> w(order);
        for (auto& x : w) x = weight(rng);
        edges.push_back({i, j, std::move(w)});
      }
    }
    WeightedDigraph g(nodes, order, std::move(edges));
    if (is_strongly_connected(g)) return g;
  }
  throw Error(ErrorKind::InvalidInput,
              fmt::format("no strongly connected graph after {} draws", max_tries));
}

IntegratorNetwork random_network(int nodes, int order, int m, int q, double density,
                                 std::uint64_t seed) {
  if (m + q > nodes) throw Error(ErrorKind::InvalidInput, "more terminals than nodes");
  auto g = random_digraph(nodes, order, density, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<int> ids(nodes);
  std::iota(ids.begin(), ids.end(), 1);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<int> meas(ids.begin(), ids.begin() + m);
  std::vector<int> act(ids.begin() + m, ids.begin() + m + q);
  std::sort(meas.begin(), meas.end());
  std::sort(act.begin(), act.end());
  return make_network(std::move(g), std::move(act), std::move(meas));
}

}  // namespace obsblock
