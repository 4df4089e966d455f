#pragma once

#include <string>
#include <vector>

#include "obsblock/designer.hpp"
#include "obsblock/linalg.hpp"
#include "obsblock/spectrum.hpp"

namespace obsblock {

/// Numerical rank of [A_cl - lambda I; C]; lambda is unobservable iff the
/// rank is below the state dimension.
int pbh_rank(const MatR& A_cl, const MatR& C, cplx lambda, double rel_tol);

/// Rank of the stacked observability matrix [C; C A; ...; C A^(dim-1)].
/// Computed by the orthogonal observability staircase instead of forming
/// powers, so nothing overflows. Singular values below
/// rel_tol * max(1, ||A||, ||C||) count as zero.
int observability_rank(const MatR& A_cl, const MatR& C, double rel_tol);

/// True when PBH finds an unobservable mode at some eigenvalue of A_cl.
bool pbh_unobservable_any(const MatR& A_cl, const MatR& C, const SpectralData& sd, double rel_tol);

struct PreservationAudit {
  double spectrum_match_error = 0.0;
  std::vector<double> residuals;  // one per design.preserved column
};

/// Closed-loop spectrum against the open-loop one, and the eigen (or chain)
/// residual of every preserved open-loop column under A + B F.
PreservationAudit preservation_audit(const SpectralData& open, const MatR& A, const MatR& B,
                                     const BlockingDesign& design);
PreservationAudit preservation_audit(const SpectralData& open, const SpectralData& closed,
                                     const MatR& A_cl, const BlockingDesign& design);

struct OutputEnergy {
  double energy = 0.0;
  double horizon = 0.0;   // may be shorter than requested on overflow
  bool shortened = false;
};

/// Trapezoidal estimate of the integral of ||C x(t)||^2 over [0, T] with
/// x(t) = exp(A_cl t) x0, propagated by the exact one-step transition matrix.
OutputEnergy output_energy(const MatR& A_cl, const MatR& C, const VecR& x0, double T, double dt);

/// Real unit vector in span{Re v, Im v}.
VecR blocked_direction(const VecC& v_hat);

struct VerificationReport {
  int pbh_rank_at_lambda = 0;
  int full_state_dim = 0;
  int obs_matrix_rank = 0;
  double obs_rank_tolerance = 0.0;
  bool oracles_agree = false;  // observability rank is deficient too; diagnostic, not part of the verdict
  double spectrum_match_error = 0.0;
  std::vector<double> preserved_vector_residuals;
  double realness_residual = 0.0;
  double output_energy = 0.0;
  double energy_horizon = 0.0;
  double blocked_entry_max = 0.0;  // ||C v_hat||_inf, unit-scaled v_hat
  bool pass = false;
  std::vector<std::string> reasons;  // failed checks
};

struct VerifyOptions {
  Tolerances tol;
  double horizon = 10.0;
  double dt = 0.01;
};

/// Runs every oracle against a gain for `net` measured through `C`.
VerificationReport verify_design(const StateSpace& ss, const SpectralData& open,
                                 const BlockingDesign& design, const VerifyOptions& opt = {});

}  // namespace obsblock
