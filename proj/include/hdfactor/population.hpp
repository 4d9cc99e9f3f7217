#pragma once

#include "hdfactor/types.hpp"

#include <cmath>
#include <string>

namespace hdfactor {

template <typename Scalar>
struct PopulationM {
  Matrix<Scalar> m;
  Vector<Scalar> eigenvalues;  // descending
};

/// Population M = sum_{k=1}^{k0} S(k) S(k)' for y_t = A x_t + e_t with x_t a
/// diagonal VAR(1) with coefficients theta_j and unit-variance innovations,
/// and e_t white noise uncorrelated with x at all leads and lags:
///   Sigma_x(k) = diag(theta_j^k / (1 - theta_j^2)),  S(k) = A Sigma_x(k) A'.
/// A need not have orthonormal columns.
template <typename DerivedA, typename DerivedT>
PopulationM<typename DerivedA::Scalar> population_m(const Eigen::MatrixBase<DerivedA>& loadings,
                                                    const Eigen::MatrixBase<DerivedT>& ar_coeffs,
                                                    Index k0) {
  using Scalar = typename DerivedA::Scalar;
  const Index p = loadings.rows();
  const Index r = loadings.cols();
  if (ar_coeffs.size() != r) throw DimensionError("need one AR coefficient per loading column");
  if (k0 < 1) throw DomainError("k0 must be >= 1");
  for (Index j = 0; j < r; ++j) {
    if (!(std::abs(ar_coeffs(j)) < Scalar(1))) {
      throw DomainError("nonstationary factor: |theta_" + std::to_string(j + 1) + "| >= 1");
    }
  }

  Vector<Scalar> variance(r);
  for (Index j = 0; j < r; ++j) variance(j) = Scalar(1) / (Scalar(1) - ar_coeffs(j) * ar_coeffs(j));

  PopulationM<Scalar> out;
  out.m = Matrix<Scalar>::Zero(p, p);
  Vector<Scalar> lagged = variance;
  for (Index k = 1; k <= k0; ++k) {
    lagged = lagged.cwiseProduct(ar_coeffs.template cast<Scalar>());
    const Matrix<Scalar> sigma = loadings * lagged.asDiagonal() * loadings.transpose();
    out.m.noalias() += sigma * sigma.transpose();
  }
  out.m = (out.m + out.m.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(out.m, Eigen::EigenvaluesOnly);
  out.eigenvalues = solver.eigenvalues().reverse();
  return out;
}

}  // namespace hdfactor
