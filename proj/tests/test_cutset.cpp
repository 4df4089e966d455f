#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "obsblock/cutset.hpp"
#include "obsblock/error.hpp"
#include "obsblock/scenarios.hpp"
#include "obsblock/spectrum.hpp"

using namespace obsblock;

namespace {

// Node 3 listens equally to 4 and 5 and L22 has [1, -1] as an eigenvector,
// so the mode x4 = -x5 vanishes on V1 and the cut and satisfies
// lambda^2 = eig(Lg). The 4-5 weights are lopsided to keep it controllable.
IntegratorNetwork symmetric_pair() {
  std::vector<Edge> edges;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{6, 1}, {1, 2}, {2, 3}}) {
    edges.push_back({a, b, {1.0, 2.0}});
    edges.push_back({b, a, {1.0, 2.0}});
  }
  edges.push_back({4, 3, {1.0, 2.0}});
  edges.push_back({5, 3, {1.0, 2.0}});
  edges.push_back({3, 4, {1.0, 2.0}});
  edges.push_back({3, 5, {2.0, 4.0}});
  edges.push_back({5, 4, {1.0, 2.0}});
  edges.push_back({4, 5, {0.5, 1.0}});
  return make_network(WeightedDigraph(6, 2, edges), {1, 2, 6}, {4});
}

int antisymmetric_column(const SpectralData& sd) {
  // [1, -1] eigenvalues of L22: 3 and 6: lambda^2 + 6 lambda + 3 = 0.
  const double root = -3.0 + std::sqrt(6.0);
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (std::abs(sd.eigenvalues(i) - root) < 1e-9) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

TEST(LgCondition, SymmetricPairIsRejected) {
  const auto net = symmetric_pair();
  const auto plan = min_vertex_cut(net.graph, net.actuation, net.measurement);
  ASSERT_EQ(plan.vcut, std::vector<int>({3}));
  const auto sd = decompose(assemble(net).A);
  const int p = antisymmetric_column(sd);
  ASSERT_GE(p, 0);
  const auto cond = lg_condition(net, plan, sd.eigenvalues(p));
  EXPECT_FALSE(cond.satisfied);
  EXPECT_LT(cond.margin, 1e-9);

  DesignOptions opt;
  opt.lambda.kind = LambdaChoice::Kind::Index;
  opt.lambda.index = p;
  try {
    design_via_cutset(net, plan, opt);
    FAIL() << "accepted a lambda violating the Lg condition";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConditionFailure);
  }
  const auto eligible = eligible_columns(net, plan, sd);
  EXPECT_EQ(std::find(eligible.begin(), eligible.end(), p), eligible.end());
}

TEST(LgCondition, ZeroAlwaysEligibleOnSymmetricPair) {
  const auto net = symmetric_pair();
  const auto plan = min_vertex_cut(net.graph, net.actuation, net.measurement);
  const auto cd = design_via_cutset(net, plan);
  EXPECT_LT(std::abs(cd.design.lambda_p), 1e-7);
  EXPECT_TRUE(cd.condition.satisfied);
  EXPECT_LT(cd.blocked_entry_max, 1e-8);
  EXPECT_LT(cd.base_output_residual, 1e-8);
}

TEST(LgCondition, EmptyV2IsTriviallySatisfied) {
  std::vector<Edge> edges;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 2}, {2, 3}}) {
    edges.push_back({a, b, {1.0, 1.0}});
    edges.push_back({b, a, {1.0, 1.0}});
  }
  const auto net = make_network(WeightedDigraph(3, 2, edges), {1}, {3});
  const auto plan = plan_from_cut(net.graph, net.actuation, net.measurement, {3});
  ASSERT_TRUE(plan.v2.empty());
  EXPECT_TRUE(lg_condition(net, plan, cplx(0.4, 0.1)).satisfied);
}

TEST(Cutset, Fig2ZeroPattern) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto net = fig2_network(seed);
    const auto plan = min_vertex_cut(net.graph, net.actuation, net.measurement);
    DesignOptions opt;
    opt.seed = seed;
    const auto cd = design_via_cutset(net, plan, opt);
    EXPECT_LT(cd.blocked_entry_max, 1e-8);
    EXPECT_LT(cd.base_output_residual, 1e-8);
    for (int id : {5, 6, 7, 8, 9, 11}) {
      EXPECT_LT(cd.zero_pattern(id - 1, 0), 1e-8);
      EXPECT_LT(cd.zero_pattern(id - 1, 1), 1e-8);
    }
    // Actuated side stays excited.
    EXPECT_GT(cd.zero_pattern.topRows(4).maxCoeff(), 1e-3);
  }
}

TEST(Cutset, GroundedLaplacianHasPositiveRealSpectrum) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_digraph(8, 2, 0.35, seed);
    const MatR L = laplacian(g, 0);
    const MatR L22 = L.bottomRightCorner(5, 5);
    Eigen::EigenSolver<MatR> es(L22);
    EXPECT_GT(es.eigenvalues().real().minCoeff(), 0.0) << seed;
  }
}
