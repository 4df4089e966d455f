#pragma once

#include <limits>
#include <vector>

#include "obsblock/designer.hpp"
#include "obsblock/graph.hpp"
#include "obsblock/model.hpp"

namespace obsblock {

/// Spectral test deciding whether zero cut entries force zero V2 entries:
/// Lg = -sum_k lambda^k L^(k)_22 must not have lambda^N as an eigenvalue.
struct LgCondition {
  cplx lambda_p;
  MatC Lg;
  VecC lg_eigenvalues;
  bool satisfied = true;
  double margin = std::numeric_limits<double>::infinity();  // min |lambda^N - eig(Lg)|
  double threshold = 0.0;
};

LgCondition lg_condition(const IntegratorNetwork& net, const CutsetPlan& plan, cplx lambda_p,
                         const Tolerances& tol = {});

struct CutsetDesign {
  CutsetPlan plan;
  LgCondition condition;
  BlockingDesign design;
  /// |v_hat| (unit-scaled) per node and derivative block, rows = nodes.
  MatR zero_pattern;
  /// max over V_cut u V2 of the unit-scaled |v_hat| entries.
  double blocked_entry_max = 0.0;
  /// ||C v_hat||_inf with the base measurement matrix, unit-scaled v_hat.
  double base_output_residual = 0.0;
};

/// Eigenvalue columns of `sd` that pass the Lg condition for `plan`.
std::vector<int> eligible_columns(const IntegratorNetwork& net, const CutsetPlan& plan,
                                  const SpectralData& sd, const Tolerances& tol = {});

/// Designs against the cut-node output and certifies that blocking carries
/// over to the base measurement set. With the default lambda choice the zero
/// eigenvalue is used for Laplacian-form networks.
CutsetDesign design_via_cutset(const IntegratorNetwork& net, const CutsetPlan& plan,
                               const DesignOptions& opt = {});

}  // namespace obsblock
