#include <algorithm>

#include <gtest/gtest.h>

#include "obsblock/error.hpp"
#include "obsblock/model.hpp"
#include "obsblock/scenarios.hpp"
#include "obsblock/spectrum.hpp"

using namespace obsblock;

TEST(Model, UncoupledDoubleIntegrators) {
  const auto net = make_network(WeightedDigraph(2, 2, {}), {1}, {2});
  const auto ss = assemble(net);
  MatR A = MatR::Zero(4, 4);
  A.topRightCorner(2, 2).setIdentity();
  EXPECT_EQ(ss.A, A);
  EXPECT_EQ(ss.B, (MatR(4, 1) << 0, 0, 1, 0).finished());
  EXPECT_EQ(ss.C, (MatR(2, 4) << 0, 1, 0, 0, 0, 0, 0, 1).finished());
}

TEST(Model, CompanionBlocksForOrderThree) {
  const auto net = random_network(5, 3, 1, 2, 0.5, 3);
  const auto ss = assemble(net);
  const int n = 5;
  ASSERT_EQ(ss.A.rows(), 15);
  EXPECT_EQ(ss.A.block(0, n, n, n), MatR::Identity(n, n));
  EXPECT_EQ(ss.A.block(n, 2 * n, n, n), MatR::Identity(n, n));
  EXPECT_TRUE(ss.A.block(0, 0, 2 * n, n).isZero());
  for (int k = 0; k < 3; ++k) EXPECT_EQ(ss.A.block(2 * n, k * n, n, n), -net.laplacians[k]);
  EXPECT_TRUE(ss.B.topRows(2 * n).isZero());
  for (int j = 0; j < net.inputs(); ++j) EXPECT_EQ(ss.B(2 * n + net.actuation[j] - 1, j), 1.0);
  EXPECT_EQ(ss.C.rows(), 3 * net.outputs_per_block());
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(ss.C(k, state_index(n, k, net.measurement[0])), 1.0);
  }
}

TEST(Model, RejectsBadTerminalSets) {
  const auto g = random_digraph(4, 2, 0.6, 1);
  EXPECT_THROW(make_network(g, {1, 2}, {2}), Error);
  EXPECT_THROW(make_network(g, {1, 1}, {2}), Error);
  EXPECT_THROW(make_network(g, {5}, {2}), Error);
  try {
    make_network(g, {1}, {2}, {MatR::Zero(4, 4)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OrderMismatch);
  }
}

TEST(Model, ClosedLoopChecksShapes) {
  const MatR A = MatR::Zero(4, 4);
  const MatR B = MatR::Zero(4, 2);
  EXPECT_NO_THROW(closed_loop(A, B, MatR::Zero(2, 4)));
  try {
    closed_loop(A, B, MatR::Zero(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModelAssembly);
  }
}

TEST(Model, PermutationRelabelsConsistently) {
  const auto net = random_network(7, 2, 2, 3, 0.4, 8);
  const std::vector<int> perm = {6, 2, 0, 5, 1, 3, 4};
  const auto moved = permute_network(net, perm);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      EXPECT_EQ(moved.laplacians[0](i, j), net.laplacians[0](perm[i], perm[j]));
      EXPECT_EQ(moved.laplacians[1](i, j), net.laplacians[1](perm[i], perm[j]));
    }
  }
  const auto a = decompose(assemble(net).A);
  const auto b = decompose(assemble(moved).A);
  EXPECT_LT(spectrum_match_error(a.eigenvalues, b.eigenvalues), 1e-9);
  // Terminal sets follow their nodes.
  for (int id : moved.actuation) {
    const int old = perm[id - 1] + 1;
    EXPECT_NE(std::find(net.actuation.begin(), net.actuation.end(), old), net.actuation.end());
  }
}

TEST(Model, CutsetOutputMeasuresCutNodes) {
  const auto net = fig2_network(2);
  const auto plan = min_vertex_cut(net.graph, net.actuation, net.measurement);
  const MatR C = cutset_output(net, plan);
  ASSERT_EQ(C.rows(), 2);
  EXPECT_EQ(C(0, state_index(11, 0, 5)), 1.0);
  EXPECT_EQ(C(1, state_index(11, 1, 5)), 1.0);
}
