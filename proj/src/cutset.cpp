#include "obsblock/cutset.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "obsblock/error.hpp"

namespace obsblock {

LgCondition lg_condition(const IntegratorNetwork& net, const CutsetPlan& plan, cplx lambda_p,
                         const Tolerances& tol) {
  validate_plan(net.graph, plan, net.actuation, net.measurement);
  LgCondition c;
  c.lambda_p = lambda_p;
  const Eigen::Index k2 = static_cast<Eigen::Index>(plan.v2.size());
  c.Lg = MatC::Zero(k2, k2);
  if (k2 == 0) return c;

  cplx power = 1.0;
  for (int k = 0; k < net.order(); ++k) {
    for (Eigen::Index i = 0; i < k2; ++i) {
      for (Eigen::Index j = 0; j < k2; ++j) {
        c.Lg(i, j) -= power * net.laplacians[k](plan.v2[i] - 1, plan.v2[j] - 1);
      }
    }
    power *= lambda_p;
  }
  Eigen::ComplexEigenSolver<MatC> es(c.Lg, false);
  c.lg_eigenvalues = es.eigenvalues();
  for (Eigen::Index i = 0; i < k2; ++i) {
    c.margin = std::min(c.margin, std::abs(power - c.lg_eigenvalues(i)));
  }
  c.threshold = tol.lg_margin * (1.0 + norm2(c.Lg));
  c.satisfied = c.margin > c.threshold;
  return c;
}

std::vector<int> eligible_columns(const IntegratorNetwork& net, const CutsetPlan& plan,
                                  const SpectralData& sd, const Tolerances& tol) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (!sd.is_eigenvector(i)) continue;
    if (lg_condition(net, plan, sd.eigenvalues(i), tol).satisfied) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

int zero_column(const SpectralData& sd) {
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (sd.is_eigenvector(i) && sd.eigenvalues(i) == cplx(0.0, 0.0)) return static_cast<int>(i);
  }
  return -1;
}

std::string describe(const SpectralData& sd, const std::vector<int>& cols) {
  std::string s;
  for (int i : cols) {
    if (!s.empty()) s += ", ";
    s += fmt::format("[{}] {:.6g}{:+.6g}i", i, sd.eigenvalues(i).real(), sd.eigenvalues(i).imag());
  }
  return s.empty() ? "none" : s;
}

}  // namespace

CutsetDesign design_via_cutset(const IntegratorNetwork& net, const CutsetPlan& plan,
                               const DesignOptions& opt) {
  validate_plan(net.graph, plan, net.actuation, net.measurement);
  if (net.laplacian_form && !is_strongly_connected(net.graph)) {
    throw Error(ErrorKind::InvalidInput, "cutset design needs a strongly connected graph");
  }

  CutsetDesign out;
  out.plan = plan;
  const auto prob = make_problem(net, plan.vcut);
  std::vector<std::string> notes;
  check_preconditions(prob, opt, &notes);

  int p = -1;
  if (opt.lambda.kind == LambdaChoice::Kind::Default) {
    if (net.laplacian_form) p = zero_column(prob.sd);
    if (p < 0 || !lg_condition(net, plan, prob.sd.eigenvalues(p), opt.tol).satisfied) {
      // Fall back to the designer's ordering among eligible eigenvalues.
      const auto eligible = eligible_columns(net, plan, prob.sd, opt.tol);
      if (eligible.empty()) {
        throw Error(ErrorKind::NoEligibleEigenvalue,
                    "no open-loop eigenvalue satisfies the Lg condition for this cut");
      }
      p = -1;
      for (int i : eligible) {
        if (opt.variant == Variant::MeasureDerivative && std::abs(prob.sd.eigenvalues(i)) == 0.0) continue;
        if (p < 0 || std::abs(prob.sd.eigenvalues(i)) < std::abs(prob.sd.eigenvalues(p))) p = i;
      }
      if (p < 0) throw Error(ErrorKind::NoEligibleEigenvalue, "no eligible nonzero eigenvalue");
    }
  } else {
    p = select_lambda(prob.sd, opt.lambda, opt.variant);
    if (!lg_condition(net, plan, prob.sd.eigenvalues(p), opt.tol).satisfied) {
      throw Error(ErrorKind::ConditionFailure,
                  fmt::format("lambda^N is an eigenvalue of Lg at the chosen lambda = {:.6g}{:+.6g}i; "
                              "eligible alternatives: {}",
                              prob.sd.eigenvalues(p).real(), prob.sd.eigenvalues(p).imag(),
                              describe(prob.sd, eligible_columns(net, plan, prob.sd, opt.tol))));
    }
  }

  out.condition = lg_condition(net, plan, prob.sd.eigenvalues(p), opt.tol);
  out.design = design_at(prob, p, opt);
  out.design.notes.insert(out.design.notes.begin(), notes.begin(), notes.end());

  const int n = net.nodes();
  const int N = net.order();
  const VecC& v = out.design.v_hat;
  const double nrm = v.norm();
  out.zero_pattern.resize(n, N);
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < n; ++j) out.zero_pattern(j, k) = std::abs(v(k * n + j)) / nrm;
  }
  std::vector<int> blocked = plan.vcut;
  blocked.insert(blocked.end(), plan.v2.begin(), plan.v2.end());
  out.blocked_entry_max = target_entry_max(v, n, N, blocked);
  out.base_output_residual =
      prob.ss.C.rows() == 0 ? 0.0 : (prob.ss.C.cast<cplx>() * v).cwiseAbs().maxCoeff() / nrm;
  return out;
}

}  // namespace obsblock
