#pragma once

#include "hdfactor/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hdfactor {

/// Observed p-dimensional time series of length n, stored series-major
/// (row i = series i, column t = time t). Immutable once constructed.
template <typename Scalar>
class BasicPanel {
 public:
  using MatrixType = Matrix<Scalar>;
  using Labels = std::vector<std::string>;

  explicit BasicPanel(MatrixType values, std::optional<Labels> series_labels = std::nullopt,
                      std::optional<Labels> time_labels = std::nullopt)
      : values_(std::move(values)),
        series_labels_(std::move(series_labels)),
        time_labels_(std::move(time_labels)) {
    if (values_.rows() < 1 || values_.cols() < 2) {
      throw DimensionError("panel needs p >= 1 series and n >= 2 observations, got p=" +
                           std::to_string(values_.rows()) + " n=" + std::to_string(values_.cols()));
    }
    if (!values_.allFinite()) throw DomainError("panel contains non-finite values");
    if (series_labels_ && static_cast<Index>(series_labels_->size()) != values_.rows()) {
      throw DimensionError("series label count does not match p");
    }
    if (time_labels_ && static_cast<Index>(time_labels_->size()) != values_.cols()) {
      throw DimensionError("time label count does not match n");
    }
  }

  const MatrixType& values() const noexcept { return values_; }
  Index dimension() const noexcept { return values_.rows(); }
  Index length() const noexcept { return values_.cols(); }
  const std::optional<Labels>& series_labels() const noexcept { return series_labels_; }
  const std::optional<Labels>& time_labels() const noexcept { return time_labels_; }

  /// Same labels, new values of identical shape.
  BasicPanel with_values(MatrixType values) const {
    return BasicPanel(std::move(values), series_labels_, time_labels_);
  }

 private:
  MatrixType values_;
  std::optional<Labels> series_labels_;
  std::optional<Labels> time_labels_;
};

using Panel = BasicPanel<double>;

/// Period of the seasonal cycle (12 for monthly data).
struct SeasonalSpec {
  Index period = 1;
};

/// Subtracts each row's sample mean.
template <typename Derived>
Matrix<typename Derived::Scalar> center(const Eigen::MatrixBase<Derived>& y) {
  Matrix<typename Derived::Scalar> out = y;
  out.colwise() -= y.rowwise().mean();
  return out;
}

template <typename Scalar>
BasicPanel<Scalar> center(const BasicPanel<Scalar>& panel) {
  return panel.with_values(center(panel.values()));
}

/// Removes the per-(series, season) mean, where the season of time t is
/// t mod period.
template <typename Derived>
Matrix<typename Derived::Scalar> seasonal_demean(const Eigen::MatrixBase<Derived>& y,
                                                 const SeasonalSpec& spec) {
  using Scalar = typename Derived::Scalar;
  const Index n = y.cols();
  if (spec.period < 1) throw DomainError("seasonal period must be >= 1");
  if (spec.period > n) {
    throw DomainError("seasonal period " + std::to_string(spec.period) +
                      " exceeds series length " + std::to_string(n));
  }
  if (spec.period == 1) return center(y);

  Matrix<Scalar> means = Matrix<Scalar>::Zero(y.rows(), spec.period);
  Vector<Scalar> counts = Vector<Scalar>::Zero(spec.period);
  for (Index t = 0; t < n; ++t) {
    means.col(t % spec.period) += y.col(t);
    counts(t % spec.period) += Scalar(1);
  }
  for (Index s = 0; s < spec.period; ++s) means.col(s) /= counts(s);

  Matrix<Scalar> out(y.rows(), n);
  for (Index t = 0; t < n; ++t) out.col(t) = y.col(t) - means.col(t % spec.period);
  return out;
}

template <typename Scalar>
BasicPanel<Scalar> seasonal_demean(const BasicPanel<Scalar>& panel, const SeasonalSpec& spec) {
  return panel.with_values(seasonal_demean(panel.values(), spec));
}

enum class Orientation { time_rows, series_rows };

/// Reads a rectangular numeric CSV. A first row containing any non-numeric
/// cell is a header; a non-numeric first cell in the first data row marks a
/// label column. Errors report 1-based file coordinates.
Panel load_csv(const std::string& path, Orientation orientation = Orientation::time_rows);

/// Writes values at 17 significant digits so that load_csv reproduces them
/// exactly.
void save_csv(const Panel& panel, const std::string& path,
              Orientation orientation = Orientation::time_rows);

/// Parses "time-rows" / "series-rows".
Orientation parse_orientation(const std::string& text);

}  // namespace hdfactor
