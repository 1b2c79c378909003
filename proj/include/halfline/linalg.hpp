#pragma once

// Small dense helpers written against Eigen::MatrixBase so they accept
// expressions as well as plain matrices.

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "halfline/types.hpp"

namespace halfline {

template <typename Derived>
double unitarity_defect(const Eigen::MatrixBase<Derived>& u) {
  using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return (u.adjoint() * u - M::Identity(u.rows(), u.cols())).norm();
}

template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).norm();
}

template <typename Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  return (0.5 * (a + a.adjoint())).eval();
}

// Nearest unitary in Frobenius norm (unitary factor of the polar decomposition).
template <typename Derived>
CMatrix polar_unitary(const Eigen::MatrixBase<Derived>& a) {
  Eigen::JacobiSVD<CMatrix> svd{CMatrix(a), Eigen::ComputeFullU | Eigen::ComputeFullV};
  return svd.matrixU() * svd.matrixV().adjoint();
}

// 2-norm condition number; +inf for exactly singular input.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& a) {
  Eigen::JacobiSVD<CMatrix> svd{CMatrix(a)};
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

// Applies a scalar function to the spectrum of a normal matrix. The complex
// Schur form of a normal matrix is diagonal with a unitary basis, which keeps
// degenerate eigenspaces orthonormal.
template <typename Derived, typename F>
CMatrix normal_matrix_function(const Eigen::MatrixBase<Derived>& a, F&& f) {
  Eigen::ComplexSchur<CMatrix> schur{CMatrix(a)};
  const CMatrix& z = schur.matrixU();
  const CMatrix& t = schur.matrixT();
  CVector mapped(t.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) mapped(i) = f(t(i, i));
  return z * mapped.asDiagonal() * z.adjoint();
}

// Eigenvalues and orthonormal eigenvectors of a normal matrix.
struct NormalEigen {
  CVector values;
  CMatrix vectors;
};

template <typename Derived>
NormalEigen normal_eigen(const Eigen::MatrixBase<Derived>& a) {
  Eigen::ComplexSchur<CMatrix> schur{CMatrix(a)};
  return {schur.matrixT().diagonal(), schur.matrixU()};
}

// Orthonormal basis of the range of a hermitian projection.
template <typename Derived>
CMatrix projection_range(const Eigen::MatrixBase<Derived>& p, double tol = 0.5) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(p));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > tol) cols.push_back(i);
  CMatrix basis(p.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    basis.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(cols[j]);
  return basis;
}

inline CMatrix all_ones(Eigen::Index n) { return CMatrix::Ones(n, n); }

}  // namespace halfline
