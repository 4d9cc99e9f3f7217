#pragma once

#include "hdfactor/autocov.hpp"
#include "hdfactor/factor_model.hpp"
#include "hdfactor/panel.hpp"
#include "hdfactor/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace hdfactor {

/// Sample cross-autocorrelations of m series at lags 0..max_lag.
/// acf[k](i, j) = corr(x_{i,t+k}, x_{j,t}); both orderings of every pair are
/// present, so acf[k](j, i) is the lag-k correlation with roles exchanged.
template <typename Scalar>
struct AcfReport {
  std::vector<Index> series_ids;  // label of each row, e.g. eigen-index
  Index max_lag = 0;
  Index length = 0;  // n
  std::vector<Matrix<Scalar>> acf;
  Scalar band = 0;  // 1.96 / sqrt(n)

  Scalar at(Index i, Index j, Index lag) const { return acf[static_cast<std::size_t>(lag)](i, j); }
};

/// Each series is centered by its own mean; normalization uses the
/// divisor-n standard deviations. A series whose standard deviation is below
/// 1e-10 * reference_scale (default: max |series|) counts as constant.
template <typename Derived>
AcfReport<typename Derived::Scalar> cross_acf(const Eigen::MatrixBase<Derived>& series, Index max_lag,
                                              std::vector<Index> series_ids = {},
                                              typename Derived::Scalar reference_scale = 0) {
  using Scalar = typename Derived::Scalar;
  const Index m = series.rows();
  const Index n = series.cols();
  if (m < 1) throw DimensionError("cross_acf needs at least one series");
  if (max_lag < 1 || max_lag > n - 2) {
    throw DomainError("max_lag must lie in [1, n-2] = [1, " + std::to_string(n - 2) + "]");
  }
  if (series_ids.empty()) {
    for (Index i = 0; i < m; ++i) series_ids.push_back(i + 1);
  }
  if (static_cast<Index>(series_ids.size()) != m) throw DimensionError("series_ids size mismatch");

  const Matrix<Scalar> centered = center(series);
  const Vector<Scalar> sd = (centered.rowwise().squaredNorm() / Scalar(n)).cwiseSqrt();
  const Scalar scale = reference_scale > 0 ? reference_scale : series.cwiseAbs().maxCoeff();
  for (Index i = 0; i < m; ++i) {
    if (!(sd(i) > Scalar(1e-10) * std::max(scale, Scalar(1e-300)))) {
      throw DomainError("series " + std::to_string(series_ids[static_cast<std::size_t>(i)]) +
                        " is constant (zero variance)");
    }
  }
  const Matrix<Scalar> standardized = sd.cwiseInverse().asDiagonal() * centered;

  AcfReport<Scalar> report;
  report.series_ids = std::move(series_ids);
  report.max_lag = max_lag;
  report.length = n;
  report.band = Scalar(1.96) / std::sqrt(Scalar(n));
  report.acf.reserve(static_cast<std::size_t>(max_lag + 1));
  for (Index k = 0; k <= max_lag; ++k) report.acf.push_back(detail::lagged_product(standardized, k));
  return report;
}

/// Fraction of |acf(i, i, k)| above the band over k = 1..max_lag, pooled
/// over all series (or all pairs when `cross` is set).
template <typename Scalar>
double band_exceedance(const AcfReport<Scalar>& report, bool cross = false) {
  Index total = 0;
  Index over = 0;
  const Index m = static_cast<Index>(report.series_ids.size());
  for (Index k = 1; k <= report.max_lag; ++k) {
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        if (!cross && i != j) continue;
        ++total;
        if (std::abs(report.at(i, j, k)) > report.band) ++over;
      }
    }
  }
  return total == 0 ? 0.0 : double(over) / double(total);
}

/// Cross-ACF of the residual directions gamma_j' y_t for 1-based eigen-indices
/// j > r_hat of the model's first-pass eigenvectors.
template <typename Scalar>
AcfReport<Scalar> residual_projection_acf(const FactorModel<Scalar>& model, const BasicPanel<Scalar>& panel,
                                          const std::vector<Index>& directions, Index max_lag) {
  const Index p = model.eigenvectors.rows();
  if (p != panel.dimension()) throw DimensionError("model and panel dimensions differ");
  if (directions.empty()) throw DomainError("no residual directions requested");
  Matrix<Scalar> basis(p, static_cast<Index>(directions.size()));
  for (std::size_t c = 0; c < directions.size(); ++c) {
    const Index j = directions[c];
    if (j <= model.r_hat) {
      throw DomainError("direction " + std::to_string(j) + " is a factor direction (r_hat = " +
                        std::to_string(model.r_hat) + "), not a residual direction");
    }
    if (j > p) throw DomainError("direction " + std::to_string(j) + " exceeds p");
    basis.col(static_cast<Index>(c)) = model.eigenvectors.col(j - 1);
  }
  const Matrix<Scalar> projected = basis.transpose() * panel.values();
  return cross_acf(projected, max_lag, directions, panel.values().cwiseAbs().maxCoeff());
}

/// Share of total variance tr(S(0)) captured by each loading column:
/// a_j' S(0) a_j / tr(S(0)).
template <typename Scalar>
Vector<Scalar> variance_explained(const FactorModel<Scalar>& model, const BasicPanel<Scalar>& panel) {
  if (model.loadings.rows() != panel.dimension()) throw DimensionError("model and panel dimensions differ");
  const Matrix<Scalar> sigma0 = sample_autocov(panel.values(), 0);
  const Scalar total = sigma0.trace();
  if (!(total > Scalar(0))) throw DomainError("panel has zero total variance");
  Vector<Scalar> out(model.loadings.cols());
  for (Index j = 0; j < model.loadings.cols(); ++j) {
    out(j) = model.loadings.col(j).dot(sigma0 * model.loadings.col(j)) / total;
  }
  return out;
}

/// ||P u||^2 / ||u||^2 where P projects onto the orthogonal complement of the
/// row span of `factors` in R^n. No intercept is added.
template <typename DerivedU, typename DerivedF>
typename DerivedU::Scalar projection_residual_ratio(const Eigen::MatrixBase<DerivedU>& u,
                                                    const Eigen::MatrixBase<DerivedF>& factors) {
  using Scalar = typename DerivedU::Scalar;
  if (u.size() != factors.cols()) throw DimensionError("series length does not match factor length");
  const Scalar norm2 = u.squaredNorm();
  if (!(norm2 > Scalar(0))) throw DomainError("projection of a zero series is undefined");
  if (factors.rows() < 1) throw DimensionError("need at least one factor series");
  if (factors.rows() > factors.cols()) throw DomainError("factor rows are linearly dependent (r > n)");

  const Matrix<Scalar> basis = factors.transpose();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(basis, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > Scalar(1e-10) * sv(0))) {
    throw DomainError("factor rows are linearly dependent");
  }
  const Vector<Scalar> uv = u;
  const Vector<Scalar> residual = uv - svd.matrixU() * (svd.matrixU().transpose() * uv);
  return std::clamp(residual.squaredNorm() / norm2, Scalar(0), Scalar(1));
}

}  // namespace hdfactor
