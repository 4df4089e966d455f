#pragma once

#include <complex>
#include <limits>

#include <Eigen/Dense>

namespace obsblock {

using cplx = std::complex<double>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatR = Mat<double>;
using MatC = Mat<cplx>;
using VecR = Vec<double>;
using VecC = Vec<cplx>;

/// Relative singular-value cutoff. A non-positive `rel_tol` selects the
/// default max(rows, cols) * machine epsilon.
inline double effective_rel_tol(Eigen::Index rows, Eigen::Index cols, double rel_tol) {
  if (rel_tol > 0.0) return rel_tol;
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

template <typename Derived>
Vec<typename Derived::RealScalar> singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  if (m.rows() == 0 || m.cols() == 0) return {};
  Eigen::BDCSVD<Plain> svd(m.eval());
  return svd.singularValues();
}

/// Number of singular values above rel_tol * sigma_max.
template <typename Derived>
int numerical_rank(const Eigen::MatrixBase<Derived>& m, double rel_tol = 0.0) {
  const auto sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = effective_rel_tol(m.rows(), m.cols(), rel_tol) * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

/// Orthonormal basis of the `dim` right singular directions with the smallest
/// singular values. The caller decides `dim`; no thresholding happens here.
template <typename Derived>
typename Derived::PlainObject trailing_right_singular(const Eigen::MatrixBase<Derived>& m,
                                                      Eigen::Index dim) {
  using Plain = typename Derived::PlainObject;
  const Eigen::Index cols = m.cols();
  if (dim <= 0) return Plain(cols, 0);
  if (m.rows() == 0) return Plain::Identity(cols, cols).rightCols(dim);
  Eigen::BDCSVD<Plain> svd(m.eval(), Eigen::ComputeFullV);
  return svd.matrixV().rightCols(dim);
}

/// Orthonormal null-space basis at the relative tolerance.
template <typename Derived>
typename Derived::PlainObject null_space(const Eigen::MatrixBase<Derived>& m, double rel_tol = 0.0) {
  const int rank = numerical_rank(m, rel_tol);
  return trailing_right_singular(m, m.cols() - rank);
}

/// sigma_max / sigma_min; +inf when singular.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& m) {
  const auto sv = singular_values(m);
  if (sv.size() == 0) return 1.0;
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

/// Induced 2-norm.
template <typename Derived>
double norm2(const Eigen::MatrixBase<Derived>& m) {
  const auto sv = singular_values(m);
  return sv.size() == 0 ? 0.0 : static_cast<double>(sv(0));
}

/// Scales `v` to unit 2-norm and rotates its phase so the first entry whose
/// magnitude exceeds 1e-8 * max|v_i| is real and positive.
template <typename Derived>
void canonicalize(const Eigen::MatrixBase<Derived>& v_) {
  using Scalar = typename Derived::Scalar;
  auto& v = const_cast<Eigen::MatrixBase<Derived>&>(v_);
  const double nrm = v.norm();
  if (nrm == 0.0) return;
  v /= nrm;
  const double peak = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8 * peak) {
      const Scalar phase = v(i) / std::abs(v(i));
      v /= phase;
      return;
    }
  }
}

}  // namespace obsblock
