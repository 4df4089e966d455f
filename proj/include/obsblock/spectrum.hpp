#pragma once

#include <vector>

#include "obsblock/linalg.hpp"

namespace obsblock {

/// Eigenstructure of a real state matrix.
///
/// Columns of `modal` are canonical eigenvectors, except where an eigenvalue
/// is defective with a single Jordan chain: those columns hold the chain
/// v_0, v_1, ... with (A - lambda I) v_j = v_{j-1} and `chain_position` j.
/// Integrator networks always carry such a chain at lambda = 0.
struct SpectralData {
  VecC eigenvalues;
  MatC modal;
  std::vector<int> pairing;         // conjugate partner column; real columns map to themselves
  std::vector<bool> defective;      // per column: eigenvalue has geometric < algebraic multiplicity
  std::vector<int> chain_position;  // 0 for eigenvectors
  bool unresolved_defect = false;   // a defect whose chain structure could not be built
  double matrix_norm = 0.0;         // ||A||_2
  double condition = 0.0;           // cond(modal)

  Eigen::Index size() const { return eigenvalues.size(); }
  bool is_real(Eigen::Index i) const { return eigenvalues(i).imag() == 0.0; }
  bool all_real() const;
  bool any_defective() const;
  bool is_eigenvector(Eigen::Index i) const { return chain_position[i] == 0; }
};

struct SpectrumOptions {
  /// Imaginary parts below pair_tol * ||A|| are snapped to zero.
  double pair_tol = 1e-8;
  /// Singular values of (A - mu I) below structure_tol * max(1, ||A||) count
  /// toward the geometric multiplicity of a cluster.
  double structure_tol = 1e-7;
  /// Initial single-linkage radius (relative to max(1, ||A||)) for grouping
  /// eigenvalues that may be one perturbed multiple eigenvalue.
  double cluster_radius = 1e-3;
};

SpectralData decompose(const MatR& A, const SpectrumOptions& options = {});

/// max over j, k of |v_{j+kn} - lambda^k v_j| for each column; NaN for
/// generalized (non-eigen) columns.
std::vector<double> check_stacked_structure(const SpectralData& sd, int nodes, int order);

/// Same relation for a single vector.
double stacked_deviation(const VecC& v, cplx lambda, int nodes, int order);

/// Largest finite entry of check_stacked_structure.
double max_stacked_deviation(const SpectralData& sd, int nodes, int order);

}  // namespace obsblock

namespace obsblock {

/// Largest |a_i - b_pi(i)| under the assignment pi minimizing the total
/// distance. Throws InvalidInput on length mismatch.
double spectrum_match_error(const VecC& a, const VecC& b);

}  // namespace obsblock
