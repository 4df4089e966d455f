#include "obsblock/verify.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "obsblock/error.hpp"
#include "obsblock/model.hpp"

namespace obsblock {

int pbh_rank(const MatR& A_cl, const MatR& C, cplx lambda, double rel_tol) {
  const Eigen::Index dim = A_cl.rows();
  if (A_cl.cols() != dim || (C.rows() > 0 && C.cols() != dim)) {
    throw Error(ErrorKind::InvalidInput, "pbh_rank: dimension mismatch");
  }
  if (lambda.imag() == 0.0) {
    MatR M(dim + C.rows(), dim);
    M << A_cl - lambda.real() * MatR::Identity(dim, dim), C;
    return numerical_rank(M, rel_tol);
  }
  MatC M(dim + C.rows(), dim);
  M << A_cl.cast<cplx>() - lambda * MatC::Identity(dim, dim), C.cast<cplx>();
  return numerical_rank(M, rel_tol);
}

int observability_rank(const MatR& A_cl, const MatR& C, double rel_tol) {
  const Eigen::Index dim = A_cl.rows();
  if (C.rows() == 0 || dim == 0) return 0;
  const double cutoff = rel_tol * std::max({1.0, norm2(A_cl), norm2(C)});

  // Orthogonal staircase on the dual pair (A^T, C^T): every step rotates the
  // still-unreached coordinates, so rounding never gets amplified.
  MatR Ar = A_cl.transpose();
  MatR Br = C.transpose();
  Eigen::Index reached = 0;
  while (Ar.rows() > 0 && Br.cols() > 0) {
    Eigen::BDCSVD<MatR> svd(Br, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    Eigen::Index rho = 0;
    while (rho < sv.size() && sv(rho) > cutoff) ++rho;
    if (rho == 0) break;
    reached += rho;
    if (rho == Ar.rows()) break;
    const MatR& U = svd.matrixU();
    const MatR T = U.transpose() * Ar * U;
    const Eigen::Index rest = Ar.rows() - rho;
    Br = T.bottomLeftCorner(rest, rho);
    Ar = T.bottomRightCorner(rest, rest);
  }
  return static_cast<int>(reached);
}

bool pbh_unobservable_any(const MatR& A_cl, const MatR& C, const SpectralData& sd, double rel_tol) {
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (pbh_rank(A_cl, C, sd.eigenvalues(i), rel_tol) < A_cl.rows()) return true;
  }
  return false;
}

PreservationAudit preservation_audit(const SpectralData& open, const MatR& A, const MatR& B,
                                     const BlockingDesign& design) {
  const MatR A_cl = closed_loop(A, B, design.F);
  return preservation_audit(open, decompose(A_cl), A_cl, design);
}

PreservationAudit preservation_audit(const SpectralData& open, const SpectralData& closed,
                                     const MatR& A_cl, const BlockingDesign& design) {
  PreservationAudit audit;
  audit.spectrum_match_error = spectrum_match_error(open.eigenvalues, closed.eigenvalues);
  const MatC Ac = A_cl.cast<cplx>();
  for (int i : design.preserved) {
    VecC r = Ac * open.modal.col(i) - open.eigenvalues(i) * open.modal.col(i);
    if (open.chain_position[i] > 0) r -= open.modal.col(i - 1);
    audit.residuals.push_back(r.norm());
  }
  return audit;
}

OutputEnergy output_energy(const MatR& A_cl, const MatR& C, const VecR& x0, double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw Error(ErrorKind::InvalidInput, "output_energy: T and dt must be positive");
  if (x0.size() != A_cl.rows() || C.cols() != A_cl.cols()) {
    throw Error(ErrorKind::InvalidInput, "output_energy: dimension mismatch");
  }
  OutputEnergy out;
  const auto steps = static_cast<long>(std::llround(T / dt));
  const MatR step = (A_cl * dt).exp();
  VecR x = x0;
  double prev = (C * x).squaredNorm();
  for (long k = 0; k < steps; ++k) {
    VecR next = step * x;
    if (!next.allFinite() || next.norm() > 1e100) {
      out.shortened = true;
      break;
    }
    const double cur = (C * next).squaredNorm();
    out.energy += 0.5 * dt * (prev + cur);
    out.horizon += dt;
    prev = cur;
    x = std::move(next);
  }
  return out;
}

VecR blocked_direction(const VecC& v_hat) {
  VecR d = v_hat.real();
  if (d.norm() <= 1e-8 * v_hat.norm()) d = v_hat.imag();
  const double nrm = d.norm();
  if (nrm > 0.0) d /= nrm;
  return d;
}

VerificationReport verify_design(const StateSpace& ss, const SpectralData& open,
                                 const BlockingDesign& design, const VerifyOptions& opt) {
  const auto& tol = opt.tol;
  VerificationReport rep;
  const MatR A_cl = closed_loop(ss.A, ss.B, design.F);
  const Eigen::Index dim = ss.A.rows();
  rep.full_state_dim = static_cast<int>(dim);
  rep.pbh_rank_at_lambda = pbh_rank(A_cl, ss.C, design.lambda_p, tol.pbh);
  const SpectralData closed = decompose(A_cl);
  rep.obs_rank_tolerance = tol.pbh;
  rep.obs_matrix_rank = observability_rank(A_cl, ss.C, rep.obs_rank_tolerance);

  const auto audit = preservation_audit(open, closed, A_cl, design);
  rep.spectrum_match_error = audit.spectrum_match_error;
  rep.preserved_vector_residuals = audit.residuals;
  rep.realness_residual = design.realness_residual;

  const double vnorm = design.v_hat.norm();
  rep.blocked_entry_max =
      ss.C.rows() == 0 || vnorm == 0.0 ? 0.0 : (ss.C.cast<cplx>() * design.v_hat).cwiseAbs().maxCoeff() / vnorm;

  const VecR x0 = blocked_direction(design.v_hat);
  const auto energy = output_energy(A_cl, ss.C, x0, opt.horizon, opt.dt);
  rep.output_energy = energy.energy;
  rep.energy_horizon = energy.horizon;

  auto fail = [&](std::string why) { rep.reasons.push_back(std::move(why)); };
  if (rep.pbh_rank_at_lambda >= rep.full_state_dim) {
    fail(fmt::format("PBH rank {} at lambda_p is full: mode is observable", rep.pbh_rank_at_lambda));
  }
  // The global rank is a diagnostic only: on large networks with clustered
  // slow modes the observable subspace itself is numerically ill-determined,
  // while the PBH rank at lambda_p stays sharp.
  rep.oracles_agree = rep.obs_matrix_rank < rep.full_state_dim;
  if (!(rep.spectrum_match_error < tol.spectrum)) {
    fail(fmt::format("spectrum moved by {:.3e}", rep.spectrum_match_error));
  }
  const double resid_cap = 1e-6 * std::max(1.0, open.matrix_norm);
  for (size_t i = 0; i < rep.preserved_vector_residuals.size(); ++i) {
    if (!(rep.preserved_vector_residuals[i] < resid_cap)) {
      fail(fmt::format("preserved column {} residual {:.3e}", design.preserved[i],
                       rep.preserved_vector_residuals[i]));
    }
  }
  if (!(rep.realness_residual < tol.realness)) {
    fail(fmt::format("gain imaginary residue {:.3e}", rep.realness_residual));
  }
  if (!(rep.blocked_entry_max < tol.zero)) {
    fail(fmt::format("C v_hat = {:.3e} is not zero", rep.blocked_entry_max));
  }
  if (energy.shortened) fail(fmt::format("trajectory overflowed at t = {:.3g}", energy.horizon));
  if (!(rep.output_energy <= 1e-10 * x0.squaredNorm() * opt.horizon)) {
    fail(fmt::format("output energy {:.3e} on the blocked direction", rep.output_energy));
  }
  rep.pass = rep.reasons.empty();
  return rep;
}

}  // namespace obsblock
