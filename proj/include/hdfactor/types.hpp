#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hdfactor {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Index = Eigen::Index;

// Failure classes. The CLI maps DomainError to exit code 1 and IoError /
// ParseError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical or statistical precondition violated (bad k0, degenerate
/// spectrum, constant series, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Input violated a documented contract (e.g. non-symmetric matrix given to
/// the symmetric eigensolver).
class ContractError : public DomainError {
 public:
  using DomainError::DomainError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, Index row = -1, Index col = -1)
      : IoError(what), row_(row), col_(col) {}
  /// 1-based file coordinates of the offending cell, -1 when not applicable.
  Index row() const noexcept { return row_; }
  Index col() const noexcept { return col_; }

 private:
  Index row_;
  Index col_;
};

}  // namespace hdfactor
