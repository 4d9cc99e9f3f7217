#pragma once

#include "hdfactor/panel.hpp"
#include "hdfactor/types.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

namespace hdfactor::testing {

using Engine = std::mt19937_64;

inline Matrix<double> gaussian(Index rows, Index cols, Engine& rng) {
  std::normal_distribution<double> z;
  Matrix<double> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

// r x n stationary-ish AR(1) factors, started from zero with a short burn-in.
inline Matrix<double> ar_factors(const Vector<double>& theta, Index n, Engine& rng) {
  std::normal_distribution<double> z;
  const Index r = theta.size();
  Vector<double> x = Vector<double>::Zero(r);
  for (int t = 0; t < 100; ++t)
    for (Index j = 0; j < r; ++j) x(j) = theta(j) * x(j) + z(rng);
  Matrix<double> out(r, n);
  for (Index t = 0; t < n; ++t) {
    for (Index j = 0; j < r; ++j) x(j) = theta(j) * x(j) + z(rng);
    out.col(t) = x;
  }
  return out;
}

// Straight double loop over t, i, j; full-sample mean, divisor n.
inline Matrix<double> naive_autocov(const Matrix<double>& y, Index k) {
  const Index p = y.rows(), n = y.cols();
  Vector<double> mean = Vector<double>::Zero(p);
  for (Index t = 0; t < n; ++t)
    for (Index i = 0; i < p; ++i) mean(i) += y(i, t);
  mean /= double(n);
  Matrix<double> out = Matrix<double>::Zero(p, p);
  for (Index t = 0; t + k < n; ++t)
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j) out(i, j) += (y(i, t + k) - mean(i)) * (y(j, t) - mean(j));
  return out / double(n);
}

inline Matrix<double> random_orthogonal(Index p, Engine& rng) {
  Eigen::HouseholderQR<Matrix<double>> qr(gaussian(p, p, rng));
  return qr.householderQ() * Matrix<double>::Identity(p, p);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("hdfactor_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace hdfactor::testing
