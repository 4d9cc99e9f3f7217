#pragma once

#include "hdfactor/panel.hpp"
#include "hdfactor/types.hpp"

#include <string>
#include <vector>

namespace hdfactor {

/// How each lag-k product is centered.
///  - full_sample: subtract the full-sample mean from both factors.
///  - window: center the leading window y_{k+1..n} and the lagging window
///    y_{1..n-k} by their own means (the T_{n-k} projection form).
/// Both use divisor n.
enum class Centering { full_sample, window };

namespace detail {

inline void check_lag(Index k, Index n) {
  if (k < 0) throw DomainError("lag must be nonnegative");
  if (k > n - 2) {
    throw DomainError("insufficient data: lag " + std::to_string(k) + " needs n >= " +
                      std::to_string(k + 2) + ", have n=" + std::to_string(n));
  }
}

// y must already be centered by its full-sample mean.
template <typename Derived>
Matrix<typename Derived::Scalar> lagged_product(const Eigen::MatrixBase<Derived>& centered,
                                                Index k) {
  using Scalar = typename Derived::Scalar;
  const Index n = centered.cols();
  Matrix<Scalar> out(centered.rows(), centered.rows());
  out.noalias() = centered.rightCols(n - k) * centered.leftCols(n - k).transpose();
  return out / Scalar(n);
}

template <typename Derived>
Matrix<typename Derived::Scalar> window_lagged_product(const Eigen::MatrixBase<Derived>& y,
                                                       Index k) {
  using Scalar = typename Derived::Scalar;
  const Index n = y.cols();
  const Matrix<Scalar> lead = center(y.rightCols(n - k));
  const Matrix<Scalar> lag = center(y.leftCols(n - k));
  Matrix<Scalar> out(y.rows(), y.rows());
  out.noalias() = lead * lag.transpose();
  return out / Scalar(n);
}

}  // namespace detail

/// Lag-k sample autocovariance n^{-1} sum_{t=1}^{n-k} (y_{t+k} - ybar)(y_t - ybar)'.
template <typename Derived>
Matrix<typename Derived::Scalar> sample_autocov(const Eigen::MatrixBase<Derived>& y, Index k,
                                                Centering centering = Centering::full_sample) {
  detail::check_lag(k, y.cols());
  if (centering == Centering::window) return detail::window_lagged_product(y, k);
  return detail::lagged_product(center(y), k);
}

template <typename Scalar>
Matrix<Scalar> sample_autocov(const BasicPanel<Scalar>& panel, Index k,
                              Centering centering = Centering::full_sample) {
  return sample_autocov(panel.values(), k, centering);
}

/// Autocovariances at lags 0..k0 and M = sum_{k=1}^{k0} S(k) S(k)'.
template <typename Scalar>
struct AutocovSet {
  Index k0 = 0;
  std::vector<Matrix<Scalar>> sigma;  // sigma[k] = lag-k autocovariance, k = 0..k0
  Matrix<Scalar> m_hat;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> accumulate_m(const std::vector<Matrix<Scalar>>& sigma) {
  const Index p = sigma.front().rows();
  Matrix<Scalar> m = Matrix<Scalar>::Zero(p, p);
  for (std::size_t k = 1; k < sigma.size(); ++k) m.noalias() += sigma[k] * sigma[k].transpose();
  // Symmetrize so the eigensolver sees an exactly symmetric matrix.
  return (m + m.transpose()) / Scalar(2);
}

}  // namespace detail

template <typename Derived>
AutocovSet<typename Derived::Scalar> build_m(const Eigen::MatrixBase<Derived>& y, Index k0,
                                             Centering centering = Centering::full_sample) {
  using Scalar = typename Derived::Scalar;
  const Index n = y.cols();
  if (k0 < 1 || k0 > n - 2) {
    throw DomainError("k0 must lie in [1, n-2] = [1, " + std::to_string(n - 2) + "], got " +
                      std::to_string(k0));
  }
  AutocovSet<Scalar> set;
  set.k0 = k0;
  set.sigma.reserve(static_cast<std::size_t>(k0 + 1));
  if (centering == Centering::window) {
    for (Index k = 0; k <= k0; ++k) set.sigma.push_back(detail::window_lagged_product(y, k));
  } else {
    const Matrix<Scalar> centered = center(y);
    for (Index k = 0; k <= k0; ++k) set.sigma.push_back(detail::lagged_product(centered, k));
  }
  set.m_hat = detail::accumulate_m(set.sigma);
  return set;
}

template <typename Scalar>
AutocovSet<Scalar> build_m(const BasicPanel<Scalar>& panel, Index k0,
                           Centering centering = Centering::full_sample) {
  return build_m(panel.values(), k0, centering);
}

/// Autocovariance set of y* = (I - B B') y computed from that of y, where B
/// has orthonormal columns. Equal to build_m on y* up to rounding because
/// the projection is linear and commutes with mean removal.
template <typename Scalar, typename Derived>
AutocovSet<Scalar> project_out(const AutocovSet<Scalar>& set,
                               const Eigen::MatrixBase<Derived>& basis) {
  AutocovSet<Scalar> out;
  out.k0 = set.k0;
  out.sigma.reserve(set.sigma.size());
  for (const auto& s : set.sigma) {
    Matrix<Scalar> left = s - basis * (basis.transpose() * s);
    out.sigma.push_back(left - (left * basis) * basis.transpose());
  }
  out.m_hat = detail::accumulate_m(out.sigma);
  return out;
}

}  // namespace hdfactor
