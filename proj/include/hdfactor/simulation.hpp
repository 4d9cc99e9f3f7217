#pragma once

#include "hdfactor/panel.hpp"
#include "hdfactor/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hdfactor::sim {

/// Pseudo-random engine used for every simulated draw. Gaussians come from
/// std::normal_distribution, uniforms from std::uniform_real_distribution.
using Engine = std::mt19937_64;
inline constexpr const char* kGeneratorName = "std::mt19937_64 seeded by splitmix64; std::normal_distribution";

/// Steps of the factor recursion discarded before the first observation.
inline constexpr Index kBurnIn = 200;

enum class LoadingScheme {
  all_ones,        // every loading entry equals 1
  uniform_scaled,  // U(-1, 1) entries divided by p^{delta_j / 2}
};

std::string to_string(LoadingScheme scheme);
LoadingScheme parse_loading_scheme(const std::string& text);

/// Data-generating process y_t = A x_t + e_t with x_t a diagonal VAR(1)
/// (unit-variance Gaussian innovations) and e_t iid N(0, noise_variance I).
struct Scenario {
  std::string name = "custom";
  Index n = 100;
  Index p = 50;
  Index r = 1;
  std::vector<double> deltas{0.0};
  std::vector<double> ar_coeffs{0.7};
  double noise_variance = 1.0;
  Index k0 = 1;
  LoadingScheme loading_scheme = LoadingScheme::all_ones;
  std::uint64_t seed = 0;

  /// Throws DomainError when the invariants do not hold.
  void validate() const;
  /// Canonical text of every field except the seed; keys seed streams.
  std::string signature() const;
};

/// One strong AR(1) factor (theta = 0.7) with all-ones loadings.
Scenario scenario_s1(Index n, Index p, std::uint64_t seed = 0);
/// Three factors of common strength delta, VAR(1) diagonal (0.6, -0.5, 0.3),
/// uniform loadings.
Scenario scenario_s2(Index n, Index p, double delta = 0.0, std::uint64_t seed = 0);
/// Two strong factors and one weak factor (delta = 0.5) on the last
/// coordinate, otherwise as scenario_s2.
Scenario scenario_s3(Index n, Index p, std::uint64_t seed = 0);

struct SimulatedData {
  Panel panel;
  Matrix<double> loadings;  // p x r, not orthonormalized
  Matrix<double> factors;   // r x n
  Matrix<double> noise;     // p x n
};

/// Deterministic in the scenario (including its seed). Draw order:
/// loadings, factor innovations (burn-in first), noise.
SimulatedData generate(const Scenario& scenario);

/// p as a function of n: either fixed or round(c * n).
struct DimensionRule {
  enum class Kind { fixed, proportional };
  Kind kind = Kind::proportional;
  double value = 0.5;

  static DimensionRule fixed(Index p) { return {Kind::fixed, double(p)}; }
  static DimensionRule proportional(double c) { return {Kind::proportional, c}; }

  Index dimension(Index n) const;
  std::string label() const;
};

/// Parses "0.5n" (proportional) or "10" (fixed).
DimensionRule parse_dimension_rule(const std::string& text);

// Seed derivation ---------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
/// FNV-1a, stable across platforms.
std::uint64_t stable_hash(const std::string& text);
/// Seed of replication `rep` of the cell identified by `cell_key`.
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t cell_key, std::uint64_t rep);

}  // namespace hdfactor::sim
