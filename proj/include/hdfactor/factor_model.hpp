#pragma once

#include "hdfactor/autocov.hpp"
#include "hdfactor/eigen_system.hpp"
#include "hdfactor/panel.hpp"
#include "hdfactor/ratio.hpp"
#include "hdfactor/types.hpp"

#include <algorithm>
#include <optional>
#include <string>

namespace hdfactor {

enum class Method { one_step, two_step };

inline const char* to_string(Method m) { return m == Method::one_step ? "one-step" : "two-step"; }

struct EstimateOptions {
  Index k0 = 5;
  /// Upper bound R of the ratio search; floor(p/2) when unset.
  std::optional<Index> max_ratio_index;
  Centering centering = Centering::full_sample;
};

/// A flat second-pass spectrum (min ratio above this) is flagged: the
/// two-step procedure found no sharp cut-off among the weaker factors.
inline constexpr double kFlatSecondPass = 0.5;

template <typename Scalar>
struct FactorModel {
  Method method = Method::one_step;
  Index k0 = 0;
  Index max_ratio_index = 0;  // R
  Centering centering = Centering::full_sample;
  Index r_hat = 0;

  Matrix<Scalar> loadings;   // p x r_hat, orthonormal columns
  Matrix<Scalar> factors;    // r_hat x n
  Matrix<Scalar> residuals;  // p x n

  // First (or only) pass.
  Vector<Scalar> eigenvalues;   // all p eigenvalues of M, descending
  Matrix<Scalar> eigenvectors;  // p x p, column j paired with eigenvalues(j)
  Vector<Scalar> ratios;        // searched ratios lambda_{i+1}/lambda_i

  // Two-step only.
  Index r1_hat = 0;
  Index r2_hat = 0;
  Vector<Scalar> second_eigenvalues;
  Vector<Scalar> second_ratios;
  bool flat_second_pass = false;

  Index dimension() const noexcept { return loadings.rows(); }
};

namespace detail {

inline Index resolve_max_index(const EstimateOptions& opts, Index p) {
  if (opts.max_ratio_index) {
    const Index r = *opts.max_ratio_index;
    if (r < 1 || r >= p) {
      throw DomainError("max ratio index R must satisfy 1 <= R < p = " + std::to_string(p));
    }
    return r;
  }
  return default_max_ratio_index(p);
}

template <typename Scalar>
void fill_factors(FactorModel<Scalar>& model, const Matrix<Scalar>& centered) {
  model.factors.noalias() = model.loadings.transpose() * centered;
  model.residuals = centered;
  model.residuals.noalias() -= model.loadings * model.factors;
}

}  // namespace detail

/// One-step estimation: eigenanalysis of M, ratio-based r_hat, loadings from
/// the leading r_hat eigenvectors, factors A'y and residuals (I - AA')y on
/// the centered panel.
template <typename Derived>
FactorModel<typename Derived::Scalar> estimate(const Eigen::MatrixBase<Derived>& y,
                                               const EstimateOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Index p = y.rows();
  const Matrix<Scalar> centered = center(y);

  FactorModel<Scalar> model;
  model.method = Method::one_step;
  model.k0 = opts.k0;
  model.centering = opts.centering;

  const AutocovSet<Scalar> set = build_m(y, opts.k0, opts.centering);
  EigenSystem<Scalar> eig = sym_eigen(set.m_hat);
  model.eigenvalues = eig.eigenvalues;
  model.eigenvectors = std::move(eig.eigenvectors);

  if (p == 1) {
    // A single series is its own factor; there is no ratio to search.
    if (!(model.eigenvalues(0) >= Scalar(kDegenerateSpectrum))) {
      throw DomainError("degenerate spectrum: all eigenvalues are numerically zero");
    }
    model.max_ratio_index = 0;
    model.r_hat = 1;
  } else {
    model.max_ratio_index = detail::resolve_max_index(opts, p);
    RatioEstimate<Scalar> est = ratio_estimate(model.eigenvalues, model.max_ratio_index);
    model.r_hat = est.r_hat;
    model.ratios = std::move(est.ratios);
  }
  model.loadings = model.eigenvectors.leftCols(model.r_hat);
  detail::fill_factors(model, centered);
  return model;
}

template <typename Scalar>
FactorModel<Scalar> estimate(const BasicPanel<Scalar>& panel, const EstimateOptions& opts = {}) {
  return estimate(panel.values(), opts);
}

/// Two-step estimation for factors of mixed strength: the first pass picks
/// r1 strong factors (ratio rule or override), y* = y - A1 A1' y is
/// re-analysed to pick r2 weaker factors, and the loadings are (A1, A2~).
template <typename Derived>
FactorModel<typename Derived::Scalar> two_step_estimate(const Eigen::MatrixBase<Derived>& y,
                                                        const EstimateOptions& opts = {},
                                                        std::optional<Index> r1_override = std::nullopt) {
  using Scalar = typename Derived::Scalar;
  const Index p = y.rows();
  if (p < 2) throw DimensionError("two-step estimation needs p >= 2");
  if (r1_override && (*r1_override < 1 || *r1_override > p - 1)) {
    throw DomainError("r1 override must lie in [1, p-1]");
  }

  FactorModel<Scalar> first = estimate(y, opts);
  const Index r1 = r1_override ? *r1_override : first.r_hat;
  if (r1 >= p) throw DomainError("first pass selected r1 >= p; nothing left for a second pass");

  const Matrix<Scalar> centered = center(y);
  const Matrix<Scalar> strong = first.eigenvectors.leftCols(r1);
  Matrix<Scalar> projected = centered;
  projected.noalias() -= strong * (strong.transpose() * centered);

  const AutocovSet<Scalar> set = build_m(projected, opts.k0, opts.centering);
  EigenSystem<Scalar> eig = sym_eigen(set.m_hat);
  RatioEstimate<Scalar> est = ratio_estimate(eig.eigenvalues, first.max_ratio_index);

  FactorModel<Scalar> model;
  model.method = Method::two_step;
  model.k0 = opts.k0;
  model.max_ratio_index = first.max_ratio_index;
  model.centering = opts.centering;
  model.r1_hat = r1;
  model.r2_hat = est.r_hat;
  model.r_hat = r1 + est.r_hat;
  if (model.r_hat > p) throw DomainError("two-step estimate exceeds the dimension");

  model.loadings.resize(p, model.r_hat);
  model.loadings << strong, eig.eigenvectors.leftCols(est.r_hat);
  model.eigenvalues = std::move(first.eigenvalues);
  model.eigenvectors = std::move(first.eigenvectors);
  model.ratios = std::move(first.ratios);
  model.second_eigenvalues = std::move(eig.eigenvalues);
  model.second_ratios = std::move(est.ratios);
  model.flat_second_pass = model.second_ratios.minCoeff() > Scalar(kFlatSecondPass);
  detail::fill_factors(model, centered);
  return model;
}

template <typename Scalar>
FactorModel<Scalar> two_step_estimate(const BasicPanel<Scalar>& panel, const EstimateOptions& opts = {},
                                      std::optional<Index> r1_override = std::nullopt) {
  return two_step_estimate(panel.values(), opts, r1_override);
}

// Rank-only variants for Monte Carlo loops: same estimator, no factor series,
// eigenvectors only where the procedure needs them.

template <typename Scalar>
struct RankSelection {
  Index r_hat = 0;
  Vector<Scalar> eigenvalues;
  Vector<Scalar> ratios;
};

template <typename Derived>
RankSelection<typename Derived::Scalar> select_rank(const Eigen::MatrixBase<Derived>& y,
                                                    const EstimateOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const AutocovSet<Scalar> set = build_m(y, opts.k0, opts.centering);
  RankSelection<Scalar> out;
  out.eigenvalues = sym_eigenvalues(set.m_hat);
  RatioEstimate<Scalar> est =
      ratio_estimate(out.eigenvalues, detail::resolve_max_index(opts, y.rows()));
  out.r_hat = est.r_hat;
  out.ratios = std::move(est.ratios);
  return out;
}

template <typename Scalar>
struct TwoStepSelection {
  RankSelection<Scalar> first;
  RankSelection<Scalar> second;
  Index r_hat() const noexcept { return first.r_hat + second.r_hat; }
};

/// Equivalent to two_step_estimate's rank decisions. The second-pass
/// autocovariances are obtained by projecting the first-pass ones, which
/// equals rebuilding them from y*.
template <typename Derived>
TwoStepSelection<typename Derived::Scalar> select_two_step_rank(const Eigen::MatrixBase<Derived>& y,
                                                                const EstimateOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Index p = y.rows();
  if (p < 2) throw DimensionError("two-step estimation needs p >= 2");
  const Index max_index = detail::resolve_max_index(opts, p);
  const AutocovSet<Scalar> set = build_m(y, opts.k0, opts.centering);

  TwoStepSelection<Scalar> out;
  EigenSystem<Scalar> eig = sym_eigen(set.m_hat);
  RatioEstimate<Scalar> est = ratio_estimate(eig.eigenvalues, max_index);
  out.first.r_hat = est.r_hat;
  out.first.eigenvalues = std::move(eig.eigenvalues);
  out.first.ratios = std::move(est.ratios);

  const AutocovSet<Scalar> reduced = project_out(set, eig.eigenvectors.leftCols(out.first.r_hat));
  out.second.eigenvalues = sym_eigenvalues(reduced.m_hat);
  RatioEstimate<Scalar> est2 = ratio_estimate(out.second.eigenvalues, max_index);
  out.second.r_hat = est2.r_hat;
  out.second.ratios = std::move(est2.ratios);
  return out;
}

}  // namespace hdfactor
