#include "hdfactor/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace hdfactor::sim {

std::string to_string(LoadingScheme scheme) {
  return scheme == LoadingScheme::all_ones ? "all-ones" : "uniform-scaled";
}

LoadingScheme parse_loading_scheme(const std::string& text) {
  if (text == "all-ones") return LoadingScheme::all_ones;
  if (text == "uniform-scaled") return LoadingScheme::uniform_scaled;
  throw DomainError("unknown loading scheme '" + text + "' (expected all-ones or uniform-scaled)");
}

void Scenario::validate() const {
  if (n < 4) throw DomainError("scenario needs n >= 4");
  if (r < 1 || p < r) throw DomainError("scenario needs p >= r >= 1");
  if (static_cast<Index>(deltas.size()) != r) throw DomainError("scenario needs one delta per factor");
  if (static_cast<Index>(ar_coeffs.size()) != r) throw DomainError("scenario needs one AR coefficient per factor");
  for (double d : deltas) {
    if (!(d >= 0.0 && d <= 1.0)) throw DomainError("factor strength delta must lie in [0, 1]");
  }
  for (double a : ar_coeffs) {
    if (!(std::abs(a) < 1.0)) throw DomainError("AR coefficient must satisfy |theta| < 1");
  }
  if (!(noise_variance >= 0.0)) throw DomainError("noise variance must be nonnegative");
  if (k0 < 1 || k0 > n - 2) throw DomainError("scenario k0 must lie in [1, n-2]");
}

std::string Scenario::signature() const {
  std::ostringstream os;
  os.precision(17);
  os << "n=" << n << ";p=" << p << ";r=" << r << ";deltas=";
  for (double d : deltas) os << d << ',';
  os << ";ar=";
  for (double a : ar_coeffs) os << a << ',';
  os << ";noise=" << noise_variance << ";k0=" << k0 << ";loadings=" << to_string(loading_scheme);
  return os.str();
}

Scenario scenario_s1(Index n, Index p, std::uint64_t seed) {
  Scenario s;
  s.name = "S1";
  s.n = n;
  s.p = p;
  s.r = 1;
  s.deltas = {0.0};
  s.ar_coeffs = {0.7};
  s.k0 = 1;
  s.loading_scheme = LoadingScheme::all_ones;
  s.seed = seed;
  return s;
}

Scenario scenario_s2(Index n, Index p, double delta, std::uint64_t seed) {
  Scenario s;
  s.name = "S2";
  s.n = n;
  s.p = p;
  s.r = 3;
  s.deltas = {delta, delta, delta};
  s.ar_coeffs = {0.6, -0.5, 0.3};
  s.k0 = 1;
  s.loading_scheme = LoadingScheme::uniform_scaled;
  s.seed = seed;
  return s;
}

Scenario scenario_s3(Index n, Index p, std::uint64_t seed) {
  Scenario s = scenario_s2(n, p, 0.0, seed);
  s.name = "S3";
  s.deltas = {0.0, 0.0, 0.5};
  return s;
}

SimulatedData generate(const Scenario& scenario) {
  scenario.validate();
  const Index n = scenario.n;
  const Index p = scenario.p;
  const Index r = scenario.r;
  Engine engine(splitmix64(scenario.seed));

  Matrix<double> loadings(p, r);
  if (scenario.loading_scheme == LoadingScheme::all_ones) {
    loadings.setOnes();
  } else {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (Index j = 0; j < r; ++j) {
      const double scale = std::pow(double(p), scenario.deltas[static_cast<std::size_t>(j)] / 2.0);
      for (Index i = 0; i < p; ++i) loadings(i, j) = uniform(engine) / scale;
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<double> factors(r, n);
  Vector<double> state = Vector<double>::Zero(r);
  for (Index t = -kBurnIn; t < n; ++t) {
    for (Index j = 0; j < r; ++j) {
      state(j) = scenario.ar_coeffs[static_cast<std::size_t>(j)] * state(j) + normal(engine);
    }
    if (t >= 0) factors.col(t) = state;
  }

  Matrix<double> noise(p, n);
  const double sd = std::sqrt(scenario.noise_variance);
  for (Index t = 0; t < n; ++t) {
    for (Index i = 0; i < p; ++i) noise(i, t) = sd * normal(engine);
  }

  Matrix<double> values = noise;
  values.noalias() += loadings * factors;
  return SimulatedData{Panel(std::move(values)), std::move(loadings), std::move(factors), std::move(noise)};
}

Index DimensionRule::dimension(Index n) const {
  const Index p = kind == Kind::fixed ? static_cast<Index>(std::llround(value))
                                      : static_cast<Index>(std::llround(value * double(n)));
  return std::max<Index>(p, 1);
}

std::string DimensionRule::label() const {
  char buf[64];
  if (kind == Kind::fixed) {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(std::llround(value)));
  } else {
    std::snprintf(buf, sizeof buf, "%gn", value);
  }
  return buf;
}

DimensionRule parse_dimension_rule(const std::string& text) {
  if (text.empty()) throw DomainError("empty dimension rule");
  try {
    std::size_t used = 0;
    if (text.back() == 'n') {
      const double c = std::stod(text.substr(0, text.size() - 1), &used);
      if (used != text.size() - 1 || !(c > 0)) throw DomainError("bad proportional rule");
      return DimensionRule::proportional(c);
    }
    const long long p = std::stoll(text, &used);
    if (used != text.size() || p < 1) throw DomainError("bad fixed dimension");
    return DimensionRule::fixed(static_cast<Index>(p));
  } catch (const std::logic_error&) {
    throw DomainError("cannot parse dimension rule '" + text + "' (expected e.g. 0.5n or 10)");
  } catch (const DomainError&) {
    throw DomainError("cannot parse dimension rule '" + text + "' (expected e.g. 0.5n or 10)");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stable_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t cell_key, std::uint64_t rep) {
  return base_seed ^ splitmix64(cell_key ^ splitmix64(rep));
}

}  // namespace hdfactor::sim
