#include "hdfactor/studies.hpp"

#include "hdfactor/autocov.hpp"
#include "hdfactor/eigen_system.hpp"
#include "hdfactor/factor_model.hpp"
#include "hdfactor/population.hpp"
#include "hdfactor/ratio.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace hdfactor::sim {

unsigned default_worker_count() {
  if (const char* env = std::getenv("HDFACTOR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(Index count, unsigned workers, const std::function<void(Index)>& body) {
  if (count <= 0) return;
  if (workers == 0) workers = default_worker_count();
  workers = static_cast<unsigned>(std::min<Index>(workers, count));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Index McResult::modal_r_hat() const {
  Index best = 0;
  Index best_count = -1;
  for (const auto& [r, c] : r_hat_counts) {
    if (c > best_count) {
      best = r;
      best_count = c;
    }
  }
  return best;
}

namespace {

std::vector<double> to_std(const Vector<double>& v) { return {v.data(), v.data() + v.size()}; }

Scenario with_seed(Scenario s, std::uint64_t seed) {
  s.seed = seed;
  return s;
}

Scenario at_grid_point(const Scenario& base, Index n, const DimensionRule& rule) {
  Scenario s = base;
  s.n = n;
  s.p = rule.dimension(n);
  return s;
}

void tally(McResult& result) {
  Index correct = 0;
  for (Index r : result.r_hat) {
    ++result.r_hat_counts[r];
    if (r == result.scenario.r) ++correct;
  }
  result.freq_correct = result.reps > 0 ? double(correct) / double(result.reps) : 0.0;
}

EstimateOptions options_for(const Scenario& s) {
  EstimateOptions opts;
  opts.k0 = s.k0;
  return opts;
}

double quantile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * double(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - double(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty sample");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

McResult rank_study(const Scenario& scenario, Index reps, const RunOptions& opts) {
  scenario.validate();
  if (reps < 1) throw DomainError("reps must be >= 1");
  McResult result;
  result.scenario = scenario;
  result.reps = reps;
  result.r_hat.assign(static_cast<std::size_t>(reps), 0);
  if (opts.keep_ratio_traces) result.ratio_traces.resize(static_cast<std::size_t>(reps));

  const std::uint64_t key = stable_hash(scenario.signature());
  const EstimateOptions est = options_for(scenario);
  parallel_for(reps, opts.workers, [&](Index rep) {
    const auto i = static_cast<std::size_t>(rep);
    const SimulatedData data =
        generate(with_seed(scenario, stream_seed(scenario.seed, key, static_cast<std::uint64_t>(rep))));
    const RankSelection<double> sel = select_rank(data.panel.values(), est);
    result.r_hat[i] = sel.r_hat;
    if (opts.keep_ratio_traces) result.ratio_traces[i] = to_std(sel.ratios);
  });
  tally(result);
  return result;
}

std::vector<Table1Cell> run_table1(const Table1Config& config, const RunOptions& opts) {
  std::vector<Table1Cell> cells;
  for (double delta : config.deltas) {
    for (const DimensionRule& rule : config.p_rules) {
      for (Index n : config.n_grid) {
        Table1Cell cell;
        cell.delta = delta;
        cell.n = n;
        cell.rule = rule;
        const Scenario s = scenario_s2(n, rule.dimension(n), delta, config.base_seed);
        cell.result = rank_study(s, config.reps, opts);
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

McResult two_step_study(const Scenario& scenario, Index reps, const RunOptions& opts) {
  scenario.validate();
  if (reps < 1) throw DomainError("reps must be >= 1");
  McResult result;
  result.scenario = scenario;
  result.reps = reps;
  result.r_hat.assign(static_cast<std::size_t>(reps), 0);
  TwoStepOutcome two;
  two.r1.assign(static_cast<std::size_t>(reps), 0);
  two.r2.assign(static_cast<std::size_t>(reps), 0);
  if (opts.keep_ratio_traces) {
    result.ratio_traces.resize(static_cast<std::size_t>(reps));
    two.second_ratio_traces.resize(static_cast<std::size_t>(reps));
  }

  const std::uint64_t key = stable_hash("two-step|" + scenario.signature());
  const EstimateOptions est = options_for(scenario);
  parallel_for(reps, opts.workers, [&](Index rep) {
    const auto i = static_cast<std::size_t>(rep);
    const SimulatedData data =
        generate(with_seed(scenario, stream_seed(scenario.seed, key, static_cast<std::uint64_t>(rep))));
    const TwoStepSelection<double> sel = select_two_step_rank(data.panel.values(), est);
    result.r_hat[i] = sel.first.r_hat;
    two.r1[i] = sel.first.r_hat;
    two.r2[i] = sel.second.r_hat;
    if (opts.keep_ratio_traces) {
      result.ratio_traces[i] = to_std(sel.first.ratios);
      two.second_ratio_traces[i] = to_std(sel.second.ratios);
    }
  });
  tally(result);

  Index correct = 0;
  for (std::size_t i = 0; i < two.r1.size(); ++i) {
    const Index total = two.r1[i] + two.r2[i];
    ++two.r_hat_counts[total];
    if (total == scenario.r) ++correct;
  }
  two.freq_correct = double(correct) / double(reps);
  result.two_step = std::move(two);
  return result;
}

double EigenErrorData::median_abs_error(std::size_t grid, std::size_t tracked_pos) const {
  std::vector<double> abs_err = errors.at(grid).at(tracked_pos);
  for (double& e : abs_err) e = std::abs(e);
  return median(std::move(abs_err));
}

EigenErrorData eigen_error_study(const EigenErrorStudy& study, const RunOptions& opts) {
  if (study.reps < 1) throw DomainError("reps must be >= 1");
  if (study.n_grid.empty()) throw DomainError("empty n grid");
  if (study.tracked.empty()) throw DomainError("no tracked eigen-indices");

  EigenErrorData data;
  data.n_grid = study.n_grid;
  data.tracked = study.tracked;
  std::vector<Scenario> points;
  for (Index n : study.n_grid) {
    points.push_back(at_grid_point(study.base, n, study.rule));
    points.back().validate();
    data.p_values.push_back(points.back().p);
    for (Index j : study.tracked) {
      if (j < 1 || j > points.back().p) throw DomainError("tracked eigen-index out of range");
    }
  }
  data.errors.assign(points.size(),
                     std::vector<std::vector<double>>(study.tracked.size(),
                                                      std::vector<double>(static_cast<std::size_t>(study.reps))));

  const Index total = static_cast<Index>(points.size()) * study.reps;
  parallel_for(total, opts.workers, [&](Index flat) {
    const auto g = static_cast<std::size_t>(flat / study.reps);
    const auto rep = static_cast<std::size_t>(flat % study.reps);
    const Scenario& s = points[g];
    const SimulatedData sample = generate(with_seed(s, stream_seed(s.seed, stable_hash(s.signature()), rep)));
    const Vector<double> estimated = sym_eigenvalues(build_m(sample.panel.values(), s.k0).m_hat);
    const Vector<double> ar = Eigen::Map<const Vector<double>>(s.ar_coeffs.data(), s.r);
    const Vector<double> truth = population_m(sample.loadings, ar, s.k0).eigenvalues;
    for (std::size_t j = 0; j < study.tracked.size(); ++j) {
      const Index idx = study.tracked[j] - 1;
      data.errors[g][j][rep] = estimated(idx) - truth(idx);
    }
  });
  return data;
}

SlopeFit fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs >= 2 paired points");
  const auto m = static_cast<Index>(x.size());
  Vector<double> lx(m), ly(m);
  for (Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(x[k] > 0 && y[k] > 0)) throw DomainError("log-log slope fit needs positive values");
    lx(i) = std::log(x[k]);
    ly(i) = std::log(y[k]);
  }
  const double mx = lx.mean();
  const double my = ly.mean();
  const double sxx = (lx.array() - mx).square().sum();
  if (!(sxx > 0)) throw DomainError("slope fit needs distinct x values");
  SlopeFit fit;
  fit.slope = ((lx.array() - mx) * (ly.array() - my)).sum() / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.ci_low = fit.ci_high = fit.slope;
  return fit;
}

std::vector<SlopeFit> rate_slopes(const EigenErrorData& data, Index bootstrap_reps, std::uint64_t seed,
                                  double level) {
  const std::vector<double> ns(data.n_grid.begin(), data.n_grid.end());
  std::vector<SlopeFit> fits;
  for (std::size_t j = 0; j < data.tracked.size(); ++j) {
    std::vector<double> medians;
    for (std::size_t g = 0; g < data.n_grid.size(); ++g) medians.push_back(data.median_abs_error(g, j));
    SlopeFit fit = fit_log_slope(ns, medians);

    if (bootstrap_reps > 0) {
      Engine engine(splitmix64(seed ^ stable_hash("bootstrap|" + std::to_string(data.tracked[j]))));
      std::vector<double> slopes;
      slopes.reserve(static_cast<std::size_t>(bootstrap_reps));
      for (Index b = 0; b < bootstrap_reps; ++b) {
        std::vector<double> boot_medians;
        for (std::size_t g = 0; g < data.n_grid.size(); ++g) {
          const auto& sample = data.errors[g][j];
          std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
          std::vector<double> resampled(sample.size());
          for (double& v : resampled) v = std::abs(sample[pick(engine)]);
          boot_medians.push_back(median(std::move(resampled)));
        }
        slopes.push_back(fit_log_slope(ns, boot_medians).slope);
      }
      const double tail = (1.0 - level) / 2.0;
      fit.ci_low = quantile(slopes, tail);
      fit.ci_high = quantile(slopes, 1.0 - tail);
    }
    fits.push_back(fit);
  }
  return fits;
}

double RatioTraceData::median_ratio(std::size_t grid, Index i) const {
  std::vector<double> values;
  for (const auto& trace : traces.at(grid)) {
    if (static_cast<Index>(trace.size()) >= i) values.push_back(trace[static_cast<std::size_t>(i - 1)]);
  }
  return median(std::move(values));
}

double RatioTraceData::median_r_hat(std::size_t grid) const {
  const auto& r = r_hat.at(grid);
  return median(std::vector<double>(r.begin(), r.end()));
}

RatioTraceData ratio_trace_study(const RatioTraceStudy& study, const RunOptions& opts) {
  if (study.reps < 1) throw DomainError("reps must be >= 1");
  RatioTraceData data;
  data.n_grid = study.n_grid;
  std::vector<Scenario> points;
  for (Index n : study.n_grid) {
    points.push_back(at_grid_point(study.base, n, study.rule));
    points.back().validate();
    data.p_values.push_back(points.back().p);
  }
  const auto reps = static_cast<std::size_t>(study.reps);
  data.traces.assign(points.size(), std::vector<std::vector<double>>(reps));
  data.r_hat.assign(points.size(), std::vector<Index>(reps, 0));

  const Index total = static_cast<Index>(points.size()) * study.reps;
  parallel_for(total, opts.workers, [&](Index flat) {
    const auto g = static_cast<std::size_t>(flat / study.reps);
    const auto rep = static_cast<std::size_t>(flat % study.reps);
    const Scenario& s = points[g];
    const SimulatedData sample = generate(with_seed(s, stream_seed(s.seed, stable_hash(s.signature()), rep)));
    const RankSelection<double> sel = select_rank(sample.panel.values(), options_for(s));
    data.traces[g][rep] = to_std(eigen_ratios(sel.eigenvalues));
    data.r_hat[g][rep] = sel.r_hat;
  });
  return data;
}

}  // namespace hdfactor::sim
