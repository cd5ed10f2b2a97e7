// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "phnet/types.hpp"

namespace phnet::linalg {

inline Matrix hermitian_part(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline bool is_real(const Matrix& a) { return a.size() == 0 || a.imag().cwiseAbs().maxCoeff() == 0.0; }

/// Largest eigenvalue of the Hermitian part of `a` together with its eigenvector.
struct ExtremeEigen {
  double value = 0.0;
  Vector vector;
};

inline ExtremeEigen max_eigen(const Matrix& a) {
  ExtremeEigen out;
  if (a.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
  const Index last = a.rows() - 1;
  out.value = es.eigenvalues()(last);
  out.vector = es.eigenvectors().col(last);
  return out;
}

inline ExtremeEigen min_eigen(const Matrix& a) {
  ExtremeEigen out;
  if (a.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
  out.value = es.eigenvalues()(0);
  out.vector = es.eigenvectors().col(0);
  return out;
}

inline RealVector singular_values(const Matrix& a) {
  if (a.size() == 0) return {};
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

inline double spectral_norm(const Matrix& a) {
  const RealVector s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(0);
}

/// Orthonormal basis of ker(a). Singular values at or below rel_tol * sigma_max
/// count as zero.
struct NullSpace {
  Matrix basis;
  Index rank = 0;
};

namespace detail {

template <class Mat>
NullSpace null_space_impl(const Mat& a, double rel_tol) {
  NullSpace out;
  const Index cols = a.cols();
  if (a.rows() == 0) {
    out.basis = Matrix::Identity(cols, cols);
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() ? s(0) : 0.0);
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  out.rank = rank;
  out.basis = svd.matrixV().rightCols(cols - rank).template cast<Scalar>();
  return out;
}

}  // namespace detail

/// Real matrices get a real basis, which keeps conjugate symmetry exact downstream.
inline NullSpace null_space(const Matrix& a, double rel_tol = kRelTol) {
  if (is_real(a)) return detail::null_space_impl<RealMatrix>(a.real(), rel_tol);
  return detail::null_space_impl<Matrix>(a, rel_tol);
}

inline Index rank(const Matrix& a, double rel_tol = kRelTol) {
  if (a.size() == 0) return 0;
  const RealVector s = singular_values(a);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

/// Orthogonal projector onto the column span of an orthonormal basis.
inline Matrix projector(const Matrix& orthonormal_basis) {
  return orthonormal_basis * orthonormal_basis.adjoint();
}

inline Matrix block_diag(const std::vector<Matrix>& blocks) {
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  Matrix out = Matrix::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace phnet::linalg
