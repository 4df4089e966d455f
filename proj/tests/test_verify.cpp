#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "obsblock/designer.hpp"
#include "obsblock/scenarios.hpp"
#include "obsblock/verify.hpp"

using namespace obsblock;

TEST(Oracles, FullOutputIsObservable) {
  const MatR A = MatR::Random(5, 5);
  const MatR C = MatR::Identity(5, 5);
  EXPECT_EQ(observability_rank(A, C, 1e-9), 5);
  EXPECT_EQ(pbh_rank(A, C, cplx(0.3, 0.0), 1e-9), 5);
}

TEST(Oracles, DoubleIntegratorPositionAndVelocity) {
  MatR A(2, 2);
  A << 0, 1, 0, 0;
  MatR pos(1, 2), vel(1, 2);
  pos << 1, 0;
  vel << 0, 1;
  EXPECT_EQ(observability_rank(A, pos, 1e-9), 2);
  EXPECT_EQ(observability_rank(A, vel, 1e-9), 1);
  EXPECT_EQ(pbh_rank(A, vel, 0.0, 1e-9), 1);
  EXPECT_EQ(pbh_rank(A, pos, 0.0, 1e-9), 2);
}

TEST(Oracles, PbhAgreesWithObservabilityRank) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 7;
    MatR A(n, n);
    for (auto& x : A.reshaped()) x = nd(rng);
    MatR C = MatR::Zero(1, n);
    for (auto& x : C.reshaped()) x = nd(rng);
    if (trial % 2) {
      // Hide one real mode: C w = 0 for an eigenvector w.
      MatR T(n, n);
      for (auto& x : T.reshaped()) x = nd(rng);
      VecR d(n);
      for (int i = 0; i < n; ++i) d(i) = 0.5 * i - 1.0;
      A = T * d.asDiagonal() * T.inverse();
      const VecR w = T.col(0);
      C -= (C * w / w.squaredNorm()) * w.transpose();
    }
    const auto sd = decompose(A);
    const bool pbh = pbh_unobservable_any(A, C, sd, 1e-9);
    const bool rank = observability_rank(A, C, 1e-9) < n;
    EXPECT_EQ(pbh, rank) << trial;
    EXPECT_EQ(pbh, trial % 2 == 1) << trial;
  }
}

TEST(Energy, ZeroInitialStateIsSilent) {
  const MatR A = -MatR::Identity(3, 3);
  const MatR C = MatR::Ones(1, 3);
  EXPECT_EQ(output_energy(A, C, VecR::Zero(3), 10.0, 0.01).energy, 0.0);
}

TEST(Energy, MatchesClosedFormAndConverges) {
  MatR A(1, 1);
  A << -0.5;
  const MatR C = MatR::Ones(1, 1);
  VecR x0(1);
  x0 << 2.0;
  // integral of 4 e^{-t} over [0, 10]
  const double exact = 4.0 * (1.0 - std::exp(-10.0));
  const auto coarse = output_energy(A, C, x0, 10.0, 0.02);
  const auto fine = output_energy(A, C, x0, 10.0, 0.01);
  EXPECT_LT(std::abs(fine.energy - exact) / exact, 1e-4);
  EXPECT_LT(std::abs(coarse.energy - fine.energy) / fine.energy, 1e-2);
}

TEST(Verify, AcceptsDesignAndRejectsZeroGain) {
  const auto net = random_network(7, 2, 1, 3, 0.5, 6);
  const auto ss = assemble(net);
  const auto open = decompose(ss.A);
  const auto d = design_blocking(net);
  const auto rep = verify_design(ss, open, d);
  EXPECT_TRUE(rep.pass) << (rep.reasons.empty() ? "" : rep.reasons.front());
  EXPECT_LE(rep.pbh_rank_at_lambda, rep.full_state_dim - 1);
  EXPECT_LT(rep.output_energy, 1e-10 * 10.0);

  auto zero = d;
  zero.F.setZero();
  EXPECT_FALSE(verify_design(ss, open, zero).pass);
}

TEST(Verify, BlockedDirectionIsRealUnit) {
  VecC v(3);
  v << cplx(1, 2), cplx(0, 1), cplx(3, 0);
  const VecR x = blocked_direction(v);
  EXPECT_NEAR(x.norm(), 1.0, 1e-12);
  MatR span(3, 2);
  span << v.real(), v.imag();
  const VecR coef = span.colPivHouseholderQr().solve(x);
  EXPECT_LT((span * coef - x).norm(), 1e-12);
}
