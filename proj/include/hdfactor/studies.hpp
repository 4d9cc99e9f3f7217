#pragma once

#include "hdfactor/simulation.hpp"
#include "hdfactor/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hdfactor::sim {

// Parallel replication ------------------------------------------------------

/// Worker count from HDFACTOR_THREADS, else hardware concurrency (>= 1).
unsigned default_worker_count();

/// Calls body(i) for i in [0, count) on up to `workers` threads. Callers must
/// write results into slots indexed by i; the first exception is rethrown.
void parallel_for(Index count, unsigned workers, const std::function<void(Index)>& body);

struct RunOptions {
  unsigned workers = 0;  // 0 = default_worker_count()
  bool keep_ratio_traces = true;
};

// Rank-selection Monte Carlo ----------------------------------------------

struct TwoStepOutcome {
  std::map<Index, Index> r_hat_counts;  // of r1 + r2
  double freq_correct = 0;
  std::vector<Index> r1;  // per replication
  std::vector<Index> r2;
  std::vector<std::vector<double>> second_ratio_traces;
};

struct McResult {
  Scenario scenario;
  Index reps = 0;
  std::map<Index, Index> r_hat_counts;
  double freq_correct = 0;  // fraction with r_hat == scenario.r
  std::vector<Index> r_hat;  // per replication
  std::vector<std::vector<double>> eigen_errors;  // per replication, tracked indices
  std::vector<std::vector<double>> ratio_traces;  // per replication
  std::optional<TwoStepOutcome> two_step;

  Index modal_r_hat() const;
};

/// Replications of generate -> one-step rank selection (k0 from the
/// scenario). Replication i uses stream_seed(scenario.seed, hash(signature), i).
McResult rank_study(const Scenario& scenario, Index reps, const RunOptions& opts = {});

struct Table1Config {
  std::vector<double> deltas{0.0, 0.5};
  std::vector<Index> n_grid{50, 100, 200, 400, 800, 1600, 3200};
  std::vector<DimensionRule> p_rules{DimensionRule::proportional(0.2), DimensionRule::proportional(0.5),
                                     DimensionRule::proportional(0.8), DimensionRule::proportional(1.2)};
  Index reps = 200;
  std::uint64_t base_seed = 0;
};

struct Table1Cell {
  double delta = 0;
  Index n = 0;
  DimensionRule rule;
  McResult result;
};

/// Frequency of r_hat = 3 for three factors of strength delta (scenario_s2)
/// over the (delta, n, p-rule) grid, k0 = 1.
std::vector<Table1Cell> run_table1(const Table1Config& config, const RunOptions& opts = {});

/// One-step versus two-step selection on the same replications.
McResult two_step_study(const Scenario& scenario, Index reps, const RunOptions& opts = {});

// Eigenvalue error and ratio studies --------------------------------------

struct EigenErrorStudy {
  Scenario base;  // n and p are overridden per grid point
  std::vector<Index> n_grid;
  DimensionRule rule;
  std::vector<Index> tracked;  // 1-based eigen-indices
  Index reps = 200;
};

struct EigenErrorData {
  std::vector<Index> n_grid;
  std::vector<Index> p_values;
  std::vector<Index> tracked;
  /// errors[g][j][rep] = lambda_hat - lambda at grid point g, tracked index j.
  std::vector<std::vector<std::vector<double>>> errors;

  double median_abs_error(std::size_t grid, std::size_t tracked_pos) const;
};

/// Population eigenvalues come from population_m with each replication's own
/// loading matrix.
EigenErrorData eigen_error_study(const EigenErrorStudy& study, const RunOptions& opts = {});

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double ci_low = 0;
  double ci_high = 0;
};

/// OLS of log y on log x. Needs at least two points, all positive.
SlopeFit fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Slope of log median |error| versus log n for each tracked index, with a
/// percentile bootstrap interval (replications resampled within each n).
std::vector<SlopeFit> rate_slopes(const EigenErrorData& data, Index bootstrap_reps = 1000,
                                  std::uint64_t seed = 0, double level = 0.95);

struct RatioTraceStudy {
  Scenario base;
  std::vector<Index> n_grid;
  DimensionRule rule;
  Index reps = 200;
};

struct RatioTraceData {
  std::vector<Index> n_grid;
  std::vector<Index> p_values;
  /// traces[g][rep] = all ratios lambda_{i+1}/lambda_i above the numerical floor.
  std::vector<std::vector<std::vector<double>>> traces;
  std::vector<std::vector<Index>> r_hat;  // [g][rep]

  /// Median over replications of ratio index i (1-based) at grid point g.
  double median_ratio(std::size_t grid, Index i) const;
  /// Median of the per-replication argmin (the one-step r_hat).
  double median_r_hat(std::size_t grid) const;
};

RatioTraceData ratio_trace_study(const RatioTraceStudy& study, const RunOptions& opts = {});

double median(std::vector<double> values);

}  // namespace hdfactor::sim
