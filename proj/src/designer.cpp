#include "obsblock/designer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "obsblock/error.hpp"

namespace obsblock {

namespace {

bool is_real_value(cplx z) { return z.imag() == 0.0; }

// h-selection in the scalar field of the bundle; real eigenvalues keep every
// quantity real so the modal set stays self-conjugate.
template <typename Scalar>
Vec<Scalar> select_direction(const Mat<Scalar>& n1, const Mat<Scalar>& constrained,
                             const Tolerances& tol) {
  const Eigen::Index q = n1.cols();
  Mat<Scalar> K;
  if (constrained.rows() == 0) {
    K = Mat<Scalar>::Identity(q, q);
  } else {
    K = null_space(constrained, tol.rank);
  }
  if (K.cols() == 0) {
    throw Error(ErrorKind::InsufficientActuation,
                fmt::format("no h with zero target rows: the {}x{} constraint block has full column rank",
                            constrained.rows(), constrained.cols()));
  }
  const Mat<Scalar> P = n1 * K;
  Eigen::BDCSVD<Mat<Scalar>> svd(P, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 1e-12) {
    throw Error(ErrorKind::DegenerateCandidate, "every admissible h gives a zero eigenvector");
  }
  Eigen::Index tied = 1;
  while (tied < sv.size() && sv(0) - sv(tied) <= 1e-10 * sv(0)) ++tied;

  Vec<Scalar> h;
  if (tied == 1) {
    h = K * svd.matrixV().col(0);
  } else {
    const Mat<Scalar> span = K * svd.matrixV().leftCols(tied);
    for (Eigen::Index i = 0; i < q; ++i) {
      const Vec<Scalar> proj = span * span.row(i).adjoint();
      if (proj.norm() > 1e-8) {
        h = proj;
        break;
      }
    }
  }
  canonicalize(h);
  return h;
}

std::vector<int> validated_targets(const std::vector<int>& targets, int nodes) {
  for (int id : targets) {
    if (id < 1 || id > nodes) {
      throw Error(ErrorKind::InvalidInput, fmt::format("target node {} outside 1..{}", id, nodes));
    }
  }
  return targets;
}

// Minimum-norm [g; z] with (A - lambda I) g + B z = rhs: the next vector of
// a closed-loop Jordan chain whose previous vector is rhs.
VecC chain_particular(const MatR& A, const MatR& B, cplx lambda, const VecC& rhs) {
  const Eigen::Index dim = A.rows();
  MatC S(dim, dim + B.cols());
  S << A.cast<cplx>() - lambda * MatC::Identity(dim, dim), B.cast<cplx>();
  VecC x = S.completeOrthogonalDecomposition().solve(rhs);
  if (is_real_value(lambda) && rhs.imag().cwiseAbs().maxCoeff() == 0.0) x = x.real().cast<cplx>();
  return x;
}

}  // namespace

NullspaceBundle nullspace_bundle(const MatR& A, const MatR& B, cplx lambda, int nodes, int order,
                                 const std::vector<int>& target_nodes, const Tolerances& tol) {
  const Eigen::Index dim = A.rows();
  const Eigen::Index q = B.cols();
  if (A.cols() != dim || B.rows() != dim || dim != static_cast<Eigen::Index>(nodes) * order) {
    throw Error(ErrorKind::ModelAssembly, "nullspace_bundle: dimension mismatch");
  }
  if (q < 1) throw Error(ErrorKind::InsufficientActuation, "no actuation nodes");
  validated_targets(target_nodes, nodes);

  NullspaceBundle b;
  b.lambda = lambda;
  VecR sv;
  if (is_real_value(lambda)) {
    MatR S(dim, dim + q);
    S << A - lambda.real() * MatR::Identity(dim, dim), B;
    Eigen::BDCSVD<MatR> svd(S, Eigen::ComputeFullV);
    sv = svd.singularValues();
    b.full = svd.matrixV().rightCols(q).cast<cplx>();
  } else {
    MatC S(dim, dim + q);
    S << A.cast<cplx>() - lambda * MatC::Identity(dim, dim), B.cast<cplx>();
    Eigen::BDCSVD<MatC> svd(S, Eigen::ComputeFullV);
    sv = svd.singularValues();
    b.full = svd.matrixV().rightCols(q);
  }
  b.smallest_row_singular = sv(dim - 1);
  const double cutoff = effective_rel_tol(dim, dim + q, tol.rank) * sv(0);
  if (!(b.smallest_row_singular > cutoff)) {
    throw Error(ErrorKind::Controllability,
                fmt::format("[A - lambda I, B] loses rank at lambda = {:.6g}{:+.6g}i: (A, B) is not controllable",
                            lambda.real(), lambda.imag()));
  }
  b.n1 = b.full.topRows(dim);
  b.n2 = b.full.bottomRows(q);

  std::vector<char> is_target(nodes, 0);
  for (int id : target_nodes) is_target[id - 1] = 1;
  const Eigen::Index m = static_cast<Eigen::Index>(std::count(is_target.begin(), is_target.end(), 1));
  for (int k = 0; k < order; ++k) {
    MatC free_rows(nodes - m, q);
    MatC target_rows(m, q);
    Eigen::Index fi = 0;
    Eigen::Index ti = 0;
    for (int j = 0; j < nodes; ++j) {
      if (is_target[j]) {
        target_rows.row(ti++) = b.n1.row(k * nodes + j);
      } else {
        free_rows.row(fi++) = b.n1.row(k * nodes + j);
      }
    }
    b.free_blocks.push_back(std::move(free_rows));
    b.target_blocks.push_back(std::move(target_rows));
  }
  return b;
}

VecC select_hp(const NullspaceBundle& bundle, Variant variant, const Tolerances& tol) {
  const int order = static_cast<int>(bundle.target_blocks.size());
  if (order == 0) throw Error(ErrorKind::InvalidInput, "empty null-space bundle");
  if (variant == Variant::MeasureDerivative && std::abs(bundle.lambda) == 0.0) {
    throw Error(ErrorKind::InvalidInput,
                "derivative variant needs a nonzero eigenvalue: zero derivative rows do not force zero positions at lambda = 0");
  }
  const MatC& constrained =
      variant == Variant::MeasurePosition ? bundle.target_blocks.front() : bundle.target_blocks.back();
  if (is_real_value(bundle.lambda)) {
    const MatR n1 = bundle.n1.real();
    const MatR c = constrained.real();
    return select_direction<double>(n1, c, tol).cast<cplx>();
  }
  return select_direction<cplx>(bundle.n1, constrained, tol);
}

Candidate build_candidate(const NullspaceBundle& bundle, const VecC& h) {
  if (h.size() != bundle.n1.cols()) throw Error(ErrorKind::InvalidInput, "h has wrong length");
  if (h.norm() == 0.0) throw Error(ErrorKind::DegenerateCandidate, "h is zero");
  return {bundle.n1 * h, bundle.n2 * h};
}

double target_entry_max(const VecC& v, int nodes, int order, const std::vector<int>& targets) {
  const double nrm = v.norm();
  if (nrm == 0.0) return 0.0;
  double worst = 0.0;
  for (int k = 0; k < order; ++k) {
    for (int id : targets) worst = std::max(worst, std::abs(v(state_index(nodes, k, id))) / nrm);
  }
  return worst;
}

int select_lambda(const SpectralData& sd, const LambdaChoice& choice, Variant variant) {
  const Eigen::Index dim = sd.size();
  const double scale = std::max(1.0, sd.matrix_norm);
  const double zero_cut = 1e-7 * scale;
  int p = -1;
  switch (choice.kind) {
    case LambdaChoice::Kind::Index:
      if (choice.index < 0 || choice.index >= dim) {
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("eigenvalue index {} outside 0..{}", choice.index, dim - 1));
      }
      p = choice.index;
      if (!sd.is_eigenvector(p)) {
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("column {} is a generalized eigenvector; pick the head of its chain", p));
      }
      break;
    case LambdaChoice::Kind::Value: {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (!sd.is_eigenvector(i)) continue;
        const double d = std::abs(sd.eigenvalues(i) - choice.value);
        if (d < best) {
          best = d;
          p = static_cast<int>(i);
        }
      }
      if (p < 0 || best > 1e-6 * scale) {
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("{:.6g}{:+.6g}i is not an open-loop eigenvalue", choice.value.real(),
                                choice.value.imag()));
      }
      break;
    }
    case LambdaChoice::Kind::Default: {
      double best_real = std::numeric_limits<double>::infinity();
      double best_cplx = std::numeric_limits<double>::infinity();
      int real_p = -1;
      int cplx_p = -1;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (!sd.is_eigenvector(i)) continue;
        const double mag = std::abs(sd.eigenvalues(i));
        if (mag <= zero_cut) continue;
        if (sd.is_real(i)) {
          if (mag < best_real) {
            best_real = mag;
            real_p = static_cast<int>(i);
          }
        } else if (sd.eigenvalues(i).imag() > 0.0 && mag < best_cplx) {
          best_cplx = mag;
          cplx_p = static_cast<int>(i);
        }
      }
      p = real_p >= 0 ? real_p : cplx_p;
      if (p < 0) throw Error(ErrorKind::NoEligibleEigenvalue, "no nonzero open-loop eigenvalue");
      break;
    }
  }
  if (variant == Variant::MeasureDerivative && std::abs(sd.eigenvalues(p)) <= zero_cut) {
    throw Error(ErrorKind::InvalidInput, "derivative variant needs a nonzero eigenvalue");
  }
  return p;
}

DesignProblem make_problem(const IntegratorNetwork& net, std::vector<int> targets) {
  DesignProblem prob;
  prob.network = &net;
  prob.ss = assemble(net);
  prob.sd = decompose(prob.ss.A);
  prob.targets = validated_targets(targets, net.nodes());
  std::sort(prob.targets.begin(), prob.targets.end());
  prob.targets.erase(std::unique(prob.targets.begin(), prob.targets.end()), prob.targets.end());
  return prob;
}

void check_preconditions(const DesignProblem& prob, const DesignOptions& opt,
                         std::vector<std::string>* notes) {
  const auto& net = *prob.network;
  const int q = net.inputs();
  const int m = static_cast<int>(prob.targets.size());
  const bool real_spectrum = prob.sd.all_real();
  const int needed = m + (real_spectrum ? 1 : 2);
  if (q < needed) {
    const auto msg = fmt::format("{} actuation nodes for {} blocked nodes; need at least {}{}", q, m,
                                 needed, real_spectrum ? " (real spectrum)" : "");
    if (opt.strict_actuation_count) throw Error(ErrorKind::InsufficientActuation, msg);
    if (notes) notes->push_back("warning: " + msg);
  }
  if (prob.sd.unresolved_defect) {
    throw Error(ErrorKind::Defective,
                "open-loop matrix has a defective eigenvalue without a single Jordan chain");
  }
  // PBH controllability at every distinct eigenvalue.
  std::vector<cplx> seen;
  for (Eigen::Index i = 0; i < prob.sd.size(); ++i) {
    const cplx lam = prob.sd.eigenvalues(i);
    if (std::find(seen.begin(), seen.end(), lam) != seen.end()) continue;
    seen.push_back(lam);
    nullspace_bundle(prob.ss.A, prob.ss.B, lam, net.nodes(), net.order(), {}, opt.tol);
  }
}

BlockingDesign assemble_and_gain(const DesignProblem& prob, int p, const Candidate& candidate,
                                 const VecC& h, const DesignOptions& opt) {
  const auto& sd = prob.sd;
  const auto& net = *prob.network;
  const Eigen::Index dim = sd.size();
  const Eigen::Index q = prob.ss.B.cols();
  if (p < 0 || p >= dim || !sd.is_eigenvector(p)) {
    throw Error(ErrorKind::InvalidInput, fmt::format("column {} is not an eigenvector", p));
  }

  BlockingDesign d;
  d.p = p;
  d.partner = sd.pairing[p];
  d.lambda_p = sd.eigenvalues(p);
  d.h_p = h;
  d.v_hat = candidate.v_hat;
  d.z_p = candidate.z;
  d.targets = prob.targets;

  MatC V = sd.modal;
  MatC Z = MatC::Zero(q, dim);
  V.col(p) = candidate.v_hat;
  Z.col(p) = candidate.z;
  std::vector<char> replaced(dim, 0);
  replaced[p] = 1;
  if (d.partner != p) {
    V.col(d.partner) = candidate.v_hat.conjugate();
    Z.col(d.partner) = candidate.z.conjugate();
    replaced[d.partner] = 1;
  }

  // A chain member can only stay if its predecessor stays.
  auto chain_broken = [&](Eigen::Index i, const std::vector<char>& kept) {
    return sd.chain_position[i] > 0 && !kept[i - 1];
  };
  std::vector<char> kept_all(dim, 1);
  for (Eigen::Index i = 0; i < dim; ++i) kept_all[i] = !replaced[i];
  bool forced = false;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!replaced[i] && chain_broken(i, kept_all)) forced = true;
  }

  if (!forced && numerical_rank(V, opt.tol.rank) == dim) {
    d.direct = true;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (!replaced[i]) d.preserved.push_back(static_cast<int>(i));
    }
  } else {
    // Greedy largest self-conjugate independent subset: candidate columns
    // first, then open-loop columns by ascending |lambda|, pairs atomically.
    std::vector<Eigen::Index> accepted_cols;
    std::vector<char> kept(dim, 0);
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (replaced[i]) accepted_cols.push_back(i);
    }
    auto stacked = [&](const std::vector<Eigen::Index>& cols) {
      MatC M(dim, static_cast<Eigen::Index>(cols.size()));
      for (size_t j = 0; j < cols.size(); ++j) M.col(j) = V.col(cols[j]);
      return M;
    };
    if (numerical_rank(stacked(accepted_cols), opt.tol.rank) !=
        static_cast<int>(accepted_cols.size())) {
      throw Error(ErrorKind::DegenerateCandidate, "modified eigenvector and its conjugate are dependent");
    }
    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (!replaced[i]) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(sd.eigenvalues(a)) < std::abs(sd.eigenvalues(b));
    });

    std::vector<std::vector<Eigen::Index>> displaced_units;
    std::vector<char> visited(dim, 0);
    for (Eigen::Index i : order) {
      if (visited[i]) continue;
      std::vector<Eigen::Index> unit{i};
      if (sd.pairing[i] != i) unit.push_back(sd.pairing[i]);
      for (auto u : unit) visited[u] = 1;
      bool ok = true;
      for (auto u : unit) ok = ok && !chain_broken(u, kept);
      if (ok) {
        auto trial = accepted_cols;
        trial.insert(trial.end(), unit.begin(), unit.end());
        ok = numerical_rank(stacked(trial), opt.tol.rank) == static_cast<int>(trial.size());
        if (ok) accepted_cols = std::move(trial);
      }
      if (ok) {
        for (auto u : unit) {
          kept[u] = 1;
          d.preserved.push_back(static_cast<int>(u));
        }
      } else {
        displaced_units.push_back(unit);
      }
    }

    // Re-synthesize each displaced column inside the null space at its own
    // eigenvalue until the set is independent again.
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& unit : displaced_units) {
      Eigen::Index k = unit.front();
      if (unit.size() == 2 && sd.eigenvalues(k).imag() < 0.0) std::swap(unit[0], unit[1]);
      k = unit.front();
      const cplx lam = sd.eigenvalues(k);
      const auto bundle =
          nullspace_bundle(prob.ss.A, prob.ss.B, lam, net.nodes(), net.order(), {}, opt.tol);
      // Generalized vectors are rebuilt on top of their (possibly new) predecessor.
      VecC base = VecC::Zero(dim + q);
      if (sd.chain_position[k] > 0) base = chain_particular(prob.ss.A, prob.ss.B, lam, V.col(k - 1));
      bool done = false;
      for (int attempt = 0; attempt < opt.repair_attempts && !done; ++attempt) {
        VecC hk(q);
        for (Eigen::Index j = 0; j < q; ++j) {
          hk(j) = is_real_value(lam) ? cplx(gauss(rng), 0.0) : cplx(gauss(rng), gauss(rng));
        }
        const VecC vk = base.head(dim) + bundle.n1 * hk;
        const VecC zk = base.tail(q) + bundle.n2 * hk;
        auto trial = accepted_cols;
        trial.insert(trial.end(), unit.begin(), unit.end());
        const MatC saved = V;
        V.col(k) = vk;
        if (unit.size() == 2) V.col(unit[1]) = vk.conjugate();
        if (numerical_rank(stacked(trial), opt.tol.rank) == static_cast<int>(trial.size())) {
          Z.col(k) = zk;
          if (unit.size() == 2) Z.col(unit[1]) = zk.conjugate();
          accepted_cols = std::move(trial);
          done = true;
        } else {
          V = saved;
        }
      }
      if (!done) {
        throw Error(ErrorKind::RepairFailure,
                    fmt::format("could not restore independence at lambda = {:.6g}{:+.6g}i after {} attempts "
                                "(rank {} of {})",
                                lam.real(), lam.imag(), opt.repair_attempts,
                                numerical_rank(stacked(accepted_cols), opt.tol.rank), dim));
      }
      for (auto u : unit) d.repaired.push_back(static_cast<int>(u));
    }
    std::sort(d.preserved.begin(), d.preserved.end());
    std::sort(d.repaired.begin(), d.repaired.end());
  }

  d.condition = condition_number(V);
  if (!(d.condition <= opt.tol.max_condition)) {
    throw Error(ErrorKind::IllConditioned,
                fmt::format("closed-loop modal matrix condition {:.3e} exceeds {:.1e}", d.condition,
                            opt.tol.max_condition));
  }
  const MatC Fc = V.transpose().partialPivLu().solve(Z.transpose()).transpose();
  d.realness_residual = Fc.imag().cwiseAbs().maxCoeff();
  if (!(d.realness_residual <= opt.tol.realness)) {
    throw Error(ErrorKind::IllConditioned,
                fmt::format("gain imaginary residue {:.3e} exceeds {:.1e}", d.realness_residual,
                            opt.tol.realness));
  }
  d.F = Fc.real();
  d.V = std::move(V);
  d.Z = std::move(Z);
  return d;
}

BlockingDesign design_at(const DesignProblem& prob, int p, const DesignOptions& opt) {
  const auto& net = *prob.network;
  if (p < 0 || p >= prob.sd.size() || !prob.sd.is_eigenvector(p)) {
    throw Error(ErrorKind::InvalidInput, fmt::format("column {} is not an eigenvector", p));
  }
  const cplx lambda = prob.sd.eigenvalues(p);
  const bool zero = std::abs(lambda) <= 1e-7 * std::max(1.0, prob.sd.matrix_norm);
  if (zero && opt.variant == Variant::MeasureDerivative) {
    throw Error(ErrorKind::InvalidInput, "derivative variant needs a nonzero eigenvalue");
  }
  const auto bundle = nullspace_bundle(prob.ss.A, prob.ss.B, lambda, net.nodes(), net.order(),
                                       prob.targets, opt.tol);
  const VecC h = select_hp(bundle, opt.variant, opt.tol);
  const Candidate cand = build_candidate(bundle, h);
  auto d = assemble_and_gain(prob, p, cand, h, opt);
  if (zero) {
    d.notes.push_back("selected eigenvalue is zero; blocking holds for the position variant only");
  }
  return d;
}

BlockingDesign design_blocking(const IntegratorNetwork& net, const DesignOptions& opt) {
  const auto prob = make_problem(net, net.measurement);
  std::vector<std::string> notes;
  check_preconditions(prob, opt, &notes);
  const int p = select_lambda(prob.sd, opt.lambda, opt.variant);
  auto d = design_at(prob, p, opt);
  d.notes.insert(d.notes.begin(), notes.begin(), notes.end());
  return d;
}

}  // namespace obsblock
