#pragma once

#include "hdfactor/types.hpp"

#include <cmath>
#include <string>

namespace hdfactor {

/// Eigenpairs of a symmetric matrix, eigenvalues descending, column j of
/// `eigenvectors` paired with eigenvalues(j).
template <typename Scalar>
struct EigenSystem {
  Vector<Scalar> eigenvalues;
  Matrix<Scalar> eigenvectors;
};

namespace detail {

template <typename Derived>
void check_symmetric(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw ContractError("eigenanalysis needs a square matrix");
  if (m.size() == 0) throw DimensionError("eigenanalysis of an empty matrix");
  const Scalar scale = m.cwiseAbs().maxCoeff();
  const Scalar asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > Scalar(1e-10) * scale) {
    throw ContractError("matrix is not symmetric: max |M - M'| = " + std::to_string(double(asym)));
  }
}

}  // namespace detail

/// Flips each column so that its largest-magnitude entry (lowest index on
/// ties) is positive.
template <typename Derived>
void normalize_signs(Eigen::MatrixBase<Derived>& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    auto best = std::abs(vectors(0, j));
    for (Index i = 1; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) > best) {
        best = std::abs(vectors(i, j));
        arg = i;
      }
    }
    if (vectors(arg, j) < 0) vectors.col(j) = -vectors.col(j);
  }
}

template <typename Derived>
EigenSystem<typename Derived::Scalar> sym_eigen(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m);
  if (solver.info() != Eigen::Success) throw DomainError("symmetric eigensolver did not converge");

  EigenSystem<Scalar> out;
  // Eigen returns ascending order.
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  normalize_signs(out.eigenvectors);
  return out;
}

/// Descending eigenvalues only; cheaper when the loadings are not needed.
template <typename Derived>
Vector<typename Derived::Scalar> sym_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw DomainError("symmetric eigensolver did not converge");
  return solver.eigenvalues().reverse();
}

}  // namespace hdfactor
