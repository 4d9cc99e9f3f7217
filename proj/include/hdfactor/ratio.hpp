#pragma once

#include "hdfactor/types.hpp"

#include <algorithm>
#include <string>

namespace hdfactor {

/// Eigenvalues at or below this fraction of the largest are treated as
/// numerically zero and excluded from the ratio search.
inline constexpr double kRatioFloor = 1e-12;
/// Spectra whose largest eigenvalue is below this are rejected outright.
inline constexpr double kDegenerateSpectrum = 1e-300;

template <typename Scalar>
struct RatioEstimate {
  Index r_hat = 0;
  /// ratios(i-1) = lambda_{i+1} / lambda_i over the searched indices i.
  Vector<Scalar> ratios;
};

namespace detail {

template <typename Derived>
Vector<typename Derived::Scalar> clamped_spectrum(const Eigen::MatrixBase<Derived>& eigenvalues) {
  using Scalar = typename Derived::Scalar;
  if (eigenvalues.size() < 2) throw DimensionError("ratio estimation needs at least two eigenvalues");
  Vector<Scalar> lambda = eigenvalues.cwiseMax(Scalar(0));
  for (Index i = 0; i + 1 < lambda.size(); ++i) {
    if (lambda(i) < lambda(i + 1)) throw ContractError("eigenvalues must be in descending order");
  }
  if (!(lambda(0) >= Scalar(kDegenerateSpectrum))) {
    throw DomainError("degenerate spectrum: all eigenvalues are numerically zero");
  }
  return lambda;
}

// Number of leading eigenvalues strictly above the floor.
template <typename Scalar>
Index count_above_floor(const Vector<Scalar>& lambda) {
  const Scalar floor = Scalar(kRatioFloor) * lambda(0);
  Index count = 0;
  while (count < lambda.size() && lambda(count) > floor) ++count;
  return count;
}

}  // namespace detail

/// Successive ratios lambda_{i+1}/lambda_i for every i whose lambda_i is above
/// the numerical-zero floor (at most p-1 entries). Used for ratio plots.
template <typename Derived>
Vector<typename Derived::Scalar> eigen_ratios(const Eigen::MatrixBase<Derived>& eigenvalues) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> lambda = detail::clamped_spectrum(eigenvalues);
  const Index limit = std::min<Index>(detail::count_above_floor(lambda), lambda.size() - 1);
  Vector<Scalar> ratios(limit);
  for (Index i = 0; i < limit; ++i) ratios(i) = lambda(i + 1) / lambda(i);
  return ratios;
}

/// r_hat = argmin_{1 <= i <= R} lambda_{i+1}/lambda_i, searching only indices
/// whose lambda_i exceeds kRatioFloor * lambda_1; ties go to the smallest i.
template <typename Derived>
RatioEstimate<typename Derived::Scalar> ratio_estimate(const Eigen::MatrixBase<Derived>& eigenvalues,
                                                       Index max_index) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> lambda = detail::clamped_spectrum(eigenvalues);
  const Index p = lambda.size();
  if (max_index < 1 || max_index >= p) {
    throw DomainError("ratio search bound R must satisfy 1 <= R < p = " + std::to_string(p) +
                      ", got " + std::to_string(max_index));
  }
  const Index limit = std::min(max_index, detail::count_above_floor(lambda));

  RatioEstimate<Scalar> out;
  out.ratios.resize(limit);
  Index best = 0;
  for (Index i = 0; i < limit; ++i) {
    out.ratios(i) = lambda(i + 1) / lambda(i);
    if (out.ratios(i) < out.ratios(best)) best = i;
  }
  out.r_hat = best + 1;
  return out;
}

/// floor(p/2) clipped to [1, p-1].
inline Index default_max_ratio_index(Index p) {
  return std::clamp<Index>(p / 2, 1, std::max<Index>(p - 1, 1));
}

}  // namespace hdfactor
