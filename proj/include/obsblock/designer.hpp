#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "obsblock/linalg.hpp"
#include "obsblock/model.hpp"
#include "obsblock/spectrum.hpp"

namespace obsblock {

/// Numerical thresholds shared by synthesis and verification.
struct Tolerances {
  double rank = 0.0;            // relative singular-value cutoff; <= 0 means max_dim * eps
  double pbh = 1e-9;            // relative cutoff for PBH / observability ranks of computed systems
  double spectrum = 1e-6;       // eigenvalue preservation
  double realness = 1e-9;       // max |Im F| before truncation
  double zero = 1e-8;           // blocked entries of the unit-scaled modified eigenvector
  double lg_margin = 1e-6;      // distance of lambda^N from eig(Lg), times (1 + ||Lg||)
  double max_condition = 1e12;  // cond(V) ceiling
};

/// Which block of the modified eigenvector is zeroed directly.
enum class Variant {
  MeasurePosition,    // position rows of the target nodes (always valid)
  MeasureDerivative,  // highest-derivative rows; needs lambda != 0
};

struct LambdaChoice {
  enum class Kind { Default, Index, Value };
  Kind kind = Kind::Default;
  int index = 0;  // column of SpectralData
  cplx value{0.0, 0.0};
};

struct DesignOptions {
  Variant variant = Variant::MeasurePosition;
  LambdaChoice lambda;
  Tolerances tol;
  std::uint64_t seed = 1;
  bool strict_actuation_count = true;  // false: report a short actuation count instead of failing
  int repair_attempts = 50;
};

/// Null-space basis of S(lambda) = [A - lambda I, B] split into state rows
/// (n1) and input rows (n2). The state rows are further split per
/// derivative block into rows of free nodes and rows of target nodes.
struct NullspaceBundle {
  cplx lambda;
  MatC full;  // (N n + q) x q, orthonormal columns
  MatC n1;    // N n x q
  MatC n2;    // q x q
  std::vector<MatC> free_blocks;    // per derivative order
  std::vector<MatC> target_blocks;  // per derivative order
  double smallest_row_singular = 0.0;

  /// Blocks for second-order networks: n3, n4 position rows, n5, n6 velocity rows.
  const MatC& n3() const { return free_blocks.at(0); }
  const MatC& n4() const { return target_blocks.at(0); }
  const MatC& n5() const { return free_blocks.at(1); }
  const MatC& n6() const { return target_blocks.at(1); }
};

/// Throws Controllability if S(lambda) loses row rank.
NullspaceBundle nullspace_bundle(const MatR& A, const MatR& B, cplx lambda, int nodes, int order,
                                 const std::vector<int>& target_nodes, const Tolerances& tol = {});

/// Unit h with N4 h = 0 (or N_top h = 0 for the derivative variant) that
/// maximizes ||N1 h||. Exact ties fall back to the canonical direction
/// nearest e_1, e_2, ...
VecC select_hp(const NullspaceBundle& bundle, Variant variant, const Tolerances& tol = {});

struct Candidate {
  VecC v_hat;
  VecC z;
};

Candidate build_candidate(const NullspaceBundle& bundle, const VecC& h);

struct BlockingDesign {
  int p = -1;         // selected column of the open-loop SpectralData
  int partner = -1;   // conjugate column (== p when real)
  cplx lambda_p;
  VecC h_p;
  VecC v_hat;
  VecC z_p;
  MatC V;
  MatC Z;
  MatR F;
  double realness_residual = 0.0;
  double condition = 0.0;
  bool direct = false;          // independent after the swap; no repair needed
  std::vector<int> preserved;   // untouched open-loop columns
  std::vector<int> repaired;    // displaced open-loop columns, now re-synthesized
  std::vector<int> targets;     // nodes whose rows were zeroed
  std::vector<std::string> notes;
};

/// Scales v to unit norm and reports the largest entry over the target
/// nodes across every derivative block.
double target_entry_max(const VecC& v, int nodes, int order, const std::vector<int>& targets);

/// Column used when `choice` is resolved against an open-loop spectrum.
int select_lambda(const SpectralData& sd, const LambdaChoice& choice, Variant variant);

/// Open-loop data for one synthesis run.
struct DesignProblem {
  const IntegratorNetwork* network = nullptr;
  StateSpace ss;
  SpectralData sd;
  std::vector<int> targets;
};

DesignProblem make_problem(const IntegratorNetwork& net, std::vector<int> targets);

/// Checks actuation count, controllability and defect hypotheses for `targets`.
void check_preconditions(const DesignProblem& prob, const DesignOptions& opt,
                         std::vector<std::string>* notes);

/// Modal replacement around column p: swap in the candidate (and its
/// conjugate), repair any lost independence, and recover F = Z V^-1.
BlockingDesign assemble_and_gain(const DesignProblem& prob, int p, const Candidate& candidate,
                                 const VecC& h, const DesignOptions& opt);

/// Full synthesis at column p, including null-space and h_p selection.
BlockingDesign design_at(const DesignProblem& prob, int p, const DesignOptions& opt);

/// Observability-blocking gain against the network's own measurement set.
BlockingDesign design_blocking(const IntegratorNetwork& net, const DesignOptions& opt = {});

}  // namespace obsblock
