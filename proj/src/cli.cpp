#include "hdfactor/cli.hpp"

#include "hdfactor/diagnostics.hpp"
#include "hdfactor/factor_model.hpp"
#include "hdfactor/io.hpp"
#include "hdfactor/panel.hpp"
#include "hdfactor/studies.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hdfactor::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

struct DataFlags {
  std::string input;
  std::string orientation = "time-rows";
  std::optional<Index> seasonal_period;
  Index k0 = 5;
  std::optional<Index> max_ratio_index;
  bool appendix_centering = false;
  std::string out = ".";
  bool dump_loadings = false;
  bool dump_factors = false;
};

struct DiagnoseFlags {
  bool two_step = false;
  std::string directions;
  Index max_lag = 20;
  std::string project;
};

struct SimFlags {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<Index> reps;
  std::string out = ".";
  Index bootstrap = 1000;
};

// Console summaries only; files keep full precision.
std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("input", f.input, "Panel CSV")->required();
  cmd->add_option("--orientation", f.orientation, "time-rows or series-rows")
      ->check(CLI::IsMember({"time-rows", "series-rows"}));
  cmd->add_option("--seasonal-period", f.seasonal_period, "Remove per-season means before estimation");
  cmd->add_option("--k0", f.k0, "Number of lags accumulated in M")->check(CLI::PositiveNumber);
  cmd->add_option("--max-ratio-index", f.max_ratio_index, "Upper bound R of the ratio search (default p/2)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--appendix-centering", f.appendix_centering, "Center each lag window by its own mean");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_flag("--dump-loadings", f.dump_loadings, "Also write loadings.csv");
  cmd->add_flag("--dump-factors", f.dump_factors, "Also write factors.csv");
}

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--seed", f.seed, "Base seed (overrides the scenario file)");
  cmd->add_option("--reps", f.reps, "Replications (overrides the scenario file)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory");
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

Panel load_panel(const DataFlags& f) {
  Panel panel = load_csv(f.input, parse_orientation(f.orientation));
  if (f.seasonal_period) panel = seasonal_demean(panel, SeasonalSpec{*f.seasonal_period});
  return panel;
}

EstimateOptions estimate_options(const DataFlags& f) {
  EstimateOptions opts;
  opts.k0 = f.k0;
  opts.max_ratio_index = f.max_ratio_index;
  opts.centering = f.appendix_centering ? Centering::window : Centering::full_sample;
  return opts;
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path.string(), j.dump(2) + "\n"); }

void write_model_outputs(const fs::path& out, const DataFlags& f, const FactorModel<double>& model,
                         Json model_json) {
  write_json(out / "model.json", model_json);
  write_text_file((out / "eigenvalues.csv").string(), io::eigenvalues_csv(model.eigenvalues));
  if (model.method == Method::one_step) {
    write_text_file((out / "ratios.csv").string(), io::ratios_csv(model.eigenvalues));
  } else {
    write_text_file((out / "ratios_pass1.csv").string(), io::ratios_csv(model.eigenvalues));
    write_text_file((out / "ratios_pass2.csv").string(), io::ratios_csv(model.second_eigenvalues));
  }
  if (f.dump_loadings) write_text_file((out / "loadings.csv").string(), io::matrix_csv(model.loadings));
  if (f.dump_factors) write_text_file((out / "factors.csv").string(), io::matrix_csv(model.factors));
}

void print_ratios(const Vector<double>& ratios, const char* label) {
  const Index shown = std::min<Index>(ratios.size(), 5);
  std::cout << label;
  for (Index i = 0; i < shown; ++i) std::cout << (i ? ", " : " ") << brief(ratios(i));
  std::cout << '\n';
}

Json with_metadata(Json body) {
  Json j;
  j["metadata"] = io::metadata();
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

int cmd_estimate(const DataFlags& f) {
  const Panel panel = load_panel(f);
  const auto model = estimate(panel, estimate_options(f));
  const fs::path out = prepare_out(f.out);
  write_model_outputs(out, f, model, with_metadata(io::to_json(model)));
  std::cout << "r_hat = " << model.r_hat << '\n';
  print_ratios(model.ratios, "top ratios:");
  return kSuccess;
}

int cmd_two_step(const DataFlags& f, std::optional<Index> r1_override) {
  const Panel panel = load_panel(f);
  const auto model = two_step_estimate(panel, estimate_options(f), r1_override);
  const fs::path out = prepare_out(f.out);
  write_model_outputs(out, f, model, with_metadata(io::to_json(model)));
  std::cout << "r_hat = " << model.r_hat << " (r1 = " << model.r1_hat << ", r2 = " << model.r2_hat << ")\n";
  print_ratios(model.ratios, "pass 1 ratios:");
  print_ratios(model.second_ratios, "pass 2 ratios:");
  if (model.flat_second_pass) std::cout << "note: no sharp minimum in the second pass\n";
  return kSuccess;
}

int cmd_diagnose(const DataFlags& f, const DiagnoseFlags& d) {
  const Panel panel = load_panel(f);
  const auto opts = estimate_options(f);
  const auto model = d.two_step ? two_step_estimate(panel, opts) : estimate(panel, opts);
  const Panel centered = center(panel);
  const fs::path out = prepare_out(f.out);

  const auto factor_acf = cross_acf(model.factors, d.max_lag);
  write_text_file((out / "acf.csv").string(), io::acf_csv(factor_acf));

  const Vector<double> shares = variance_explained(model, panel);
  std::string shares_csv = "index,fraction\n";
  for (Index j = 0; j < shares.size(); ++j) {
    shares_csv += std::to_string(j + 1) + "," + format_double(shares(j)) + "\n";
  }
  write_text_file((out / "variance_explained.csv").string(), shares_csv);

  Json diagnostics;
  diagnostics["variance_explained"] = std::vector<double>(shares.data(), shares.data() + shares.size());
  diagnostics["variance_explained_total"] = shares.sum();
  diagnostics["acf_band"] = factor_acf.band;
  diagnostics["factor_band_exceedance"] = band_exceedance(factor_acf);

  if (!d.directions.empty()) {
    const auto dirs = io::parse_index_list(d.directions);
    const auto resid = residual_projection_acf(model, centered, dirs, d.max_lag);
    write_text_file((out / "residual_acf.csv").string(), io::acf_csv(resid));
    diagnostics["residual_directions"] = dirs;
    diagnostics["residual_band_exceedance"] = band_exceedance(resid, true);
  }

  std::cout << "r_hat = " << model.r_hat << '\n';
  std::cout << "variance explained = " << brief(shares.sum()) << '\n';
  if (!d.project.empty()) {
    const Panel u = load_csv(d.project, Orientation::time_rows);
    if (u.dimension() != 1) throw DimensionError("--project expects a single series");
    if (u.length() != panel.length()) throw DimensionError("--project series length differs from the panel");
    const double ratio = projection_residual_ratio(u.values().row(0).transpose(), model.factors);
    diagnostics["projection_residual_ratio"] = ratio;
    write_text_file((out / "projection.txt").string(), format_double(ratio) + "\n");
    std::cout << "projection residual ratio = " << brief(ratio) << '\n';
  }

  Json model_json = io::to_json(model);
  model_json["diagnostics"] = std::move(diagnostics);
  write_json(out / "model.json", with_metadata(std::move(model_json)));
  return kSuccess;
}

std::string cell_id(const sim::Scenario& s) {
  return s.name + "_n" + std::to_string(s.n) + "_p" + std::to_string(s.p);
}

io::StudyConfig load_config(const SimFlags& f) {
  io::StudyConfig cfg = io::load_study_config(f.scenario);
  if (f.seed) cfg.scenario.seed = *f.seed;
  if (f.reps) cfg.reps = *f.reps;
  return cfg;
}

Json eigen_error_outputs(const sim::EigenErrorData& data, const io::StudyConfig& cfg, const fs::path& out,
                         Index bootstrap) {
  std::string csv = io::traces_header();
  for (std::size_t g = 0; g < data.n_grid.size(); ++g) {
    const std::string id = cfg.scenario.name + "_n" + std::to_string(data.n_grid[g]) + "_p" +
                           std::to_string(data.p_values[g]);
    for (std::size_t rep = 0; rep < data.errors[g].front().size(); ++rep) {
      for (std::size_t j = 0; j < data.tracked.size(); ++j) {
        csv += id + "," + std::to_string(data.n_grid[g]) + "," + std::to_string(data.p_values[g]) + "," +
               std::to_string(rep) + "," + std::to_string(data.tracked[j]) + "," +
               format_double(data.errors[g][j][rep]) + "\n";
      }
    }
  }
  write_text_file((out / "eigen_errors.csv").string(), csv);

  const auto fits = sim::rate_slopes(data, bootstrap, cfg.scenario.seed);
  write_text_file((out / "slopes.csv").string(), io::slopes_csv(data.tracked, fits));

  Json j;
  j["n_grid"] = data.n_grid;
  j["p"] = data.p_values;
  j["tracked"] = data.tracked;
  Json medians = Json::array();
  for (std::size_t g = 0; g < data.n_grid.size(); ++g) {
    std::vector<double> row;
    for (std::size_t k = 0; k < data.tracked.size(); ++k) row.push_back(data.median_abs_error(g, k));
    medians.push_back(row);
  }
  j["median_abs_error"] = std::move(medians);
  Json slopes = Json::array();
  for (std::size_t k = 0; k < fits.size(); ++k) {
    slopes.push_back({{"j", data.tracked[k]},
                      {"slope", fits[k].slope},
                      {"ci_low", fits[k].ci_low},
                      {"ci_high", fits[k].ci_high}});
    std::cout << "j = " << data.tracked[k] << ": slope " << brief(fits[k].slope) << " ["
              << brief(fits[k].ci_low) << ", " << brief(fits[k].ci_high) << "]\n";
  }
  j["slopes"] = std::move(slopes);
  return j;
}

sim::EigenErrorStudy eigen_study_from(const io::StudyConfig& cfg) {
  sim::EigenErrorStudy study;
  study.base = cfg.scenario;
  study.n_grid = cfg.n_grid.empty() ? std::vector<Index>{200, 400, 800, 1600, 3200} : cfg.n_grid;
  study.rule = cfg.p_rules.empty() ? sim::DimensionRule::fixed(cfg.scenario.p) : cfg.p_rules.front();
  study.tracked = cfg.tracked.empty() ? std::vector<Index>{1, 2} : cfg.tracked;
  study.reps = cfg.reps;
  return study;
}

int cmd_simulate(const SimFlags& f) {
  const io::StudyConfig cfg = load_config(f);
  const fs::path out = prepare_out(f.out);
  const sim::RunOptions run;
  Json result;
  result["study"] = io::to_string(cfg.kind);
  result["reps"] = cfg.reps;
  std::string traces = io::traces_header();

  switch (cfg.kind) {
    case io::StudyConfig::Kind::rank: {
      const auto mc = sim::rank_study(cfg.scenario, cfg.reps, run);
      io::append_traces(traces, cell_id(cfg.scenario), cfg.scenario.n, cfg.scenario.p, mc.ratio_traces);
      result["result"] = io::to_json(mc);
      std::cout << cell_id(cfg.scenario) << ": freq(r_hat = " << cfg.scenario.r
                << ") = " << brief(mc.freq_correct) << '\n';
      break;
    }
    case io::StudyConfig::Kind::table1: {
      sim::Table1Config t;
      if (!cfg.table_deltas.empty()) t.deltas = cfg.table_deltas;
      if (!cfg.n_grid.empty()) t.n_grid = cfg.n_grid;
      if (!cfg.p_rules.empty()) t.p_rules = cfg.p_rules;
      t.reps = cfg.reps;
      t.base_seed = cfg.scenario.seed;
      Json cells = Json::array();
      for (const auto& cell : sim::run_table1(t, run)) {
        Json c;
        c["delta"] = cell.delta;
        c["n"] = cell.n;
        c["p_rule"] = cell.rule.label();
        c["p"] = cell.result.scenario.p;
        c["freq_correct"] = cell.result.freq_correct;
        c["result"] = io::to_json(cell.result);
        cells.push_back(std::move(c));
        const std::string id = "delta" + format_double(cell.delta) + "_" + cell_id(cell.result.scenario);
        io::append_traces(traces, id, cell.n, cell.result.scenario.p, cell.result.ratio_traces);
        std::cout << "delta = " << brief(cell.delta) << ", n = " << cell.n << ", p = " << cell.rule.label()
                  << ": " << brief(cell.result.freq_correct) << '\n';
      }
      result["cells"] = std::move(cells);
      break;
    }
    case io::StudyConfig::Kind::two_step: {
      const auto mc = sim::two_step_study(cfg.scenario, cfg.reps, run);
      io::append_traces(traces, cell_id(cfg.scenario), cfg.scenario.n, cfg.scenario.p, mc.ratio_traces);
      std::string second = io::traces_header();
      io::append_traces(second, cell_id(cfg.scenario), cfg.scenario.n, cfg.scenario.p,
                        mc.two_step->second_ratio_traces);
      write_text_file((out / "traces_pass2.csv").string(), second);
      result["result"] = io::to_json(mc);
      std::cout << "one-step freq = " << brief(mc.freq_correct)
                << ", two-step freq = " << brief(mc.two_step->freq_correct) << '\n';
      break;
    }
    case io::StudyConfig::Kind::ratio_trace: {
      sim::RatioTraceStudy study;
      study.base = cfg.scenario;
      study.n_grid = cfg.n_grid.empty() ? std::vector<Index>{cfg.scenario.n} : cfg.n_grid;
      study.rule = cfg.p_rules.empty() ? sim::DimensionRule::fixed(cfg.scenario.p) : cfg.p_rules.front();
      study.reps = cfg.reps;
      const auto data = sim::ratio_trace_study(study, run);
      Json grid = Json::array();
      for (std::size_t g = 0; g < data.n_grid.size(); ++g) {
        sim::Scenario s = cfg.scenario;
        s.n = data.n_grid[g];
        s.p = data.p_values[g];
        io::append_traces(traces, cell_id(s), s.n, s.p, data.traces[g]);
        std::vector<double> medians;
        const Index max_index = std::min<Index>(s.p - 1, 20);
        for (Index i = 1; i <= max_index; ++i) medians.push_back(data.median_ratio(g, i));
        grid.push_back({{"n", s.n}, {"p", s.p}, {"median_r_hat", data.median_r_hat(g)}, {"median_ratios", medians}});
        std::cout << cell_id(s) << ": median r_hat = " << brief(data.median_r_hat(g)) << '\n';
      }
      result["scenario"] = io::to_json(cfg.scenario);
      result["grid"] = std::move(grid);
      break;
    }
    case io::StudyConfig::Kind::eigen_error: {
      result["scenario"] = io::to_json(cfg.scenario);
      result["rates"] = eigen_error_outputs(sim::eigen_error_study(eigen_study_from(cfg), run), cfg, out,
                                            f.bootstrap);
      break;
    }
  }

  write_text_file((out / "traces.csv").string(), traces);
  write_json(out / "results.json", with_metadata(std::move(result)));
  return kSuccess;
}

int cmd_rates(const SimFlags& f) {
  io::StudyConfig cfg;
  if (!f.scenario.empty()) {
    cfg = io::load_study_config(f.scenario);
  } else {
    cfg.scenario = sim::scenario_s1(200, 10);
    cfg.p_rules = {sim::DimensionRule::fixed(10)};
  }
  if (f.seed) cfg.scenario.seed = *f.seed;
  if (f.reps) cfg.reps = *f.reps;
  const fs::path out = prepare_out(f.out);
  Json result;
  result["scenario"] = io::to_json(cfg.scenario);
  result["reps"] = cfg.reps;
  result["rates"] = eigen_error_outputs(sim::eigen_error_study(eigen_study_from(cfg), {}), cfg, out, f.bootstrap);
  write_json(out / "rates.json", with_metadata(std::move(result)));
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Factor modeling for high-dimensional time series by eigenanalysis of lagged autocovariances"};
  app.name("hdfactor");
  app.require_subcommand(1);

  DataFlags est_flags, two_flags, diag_flags;
  DiagnoseFlags diag;
  SimFlags sim_flags, rate_flags;
  std::optional<Index> r1_override;

  auto* est = app.add_subcommand("estimate", "One-step estimation of r, loadings and factors");
  add_data_flags(est, est_flags);

  auto* two = app.add_subcommand("two-step", "Two-step estimation for strong and weak factors");
  add_data_flags(two, two_flags);
  two->add_option("--r1", r1_override, "Fix the number of strong factors")->check(CLI::PositiveNumber);

  auto* dia = app.add_subcommand("diagnose", "Factor ACF, residual-direction ACF, variance explained");
  add_data_flags(dia, diag_flags);
  dia->add_flag("--two-step", diag.two_step, "Fit the two-step model");
  dia->add_option("--directions", diag.directions, "Residual eigen-indices, e.g. 3,4,5");
  dia->add_option("--max-lag", diag.max_lag, "Largest ACF lag")->check(CLI::PositiveNumber);
  dia->add_option("--project", diag.project, "Series to project on the factor space (single-column CSV)");

  auto* simc = app.add_subcommand("simulate", "Monte Carlo study described by a scenario file");
  simc->add_option("--scenario", sim_flags.scenario, "Scenario file (key = value lines or JSON)")->required();
  add_sim_flags(simc, sim_flags);

  auto* rates = app.add_subcommand("rates", "Eigenvalue error rates and log-log slope fits");
  rates->add_option("--scenario", rate_flags.scenario, "Scenario file (study = eigen-error)");
  rates->add_option("--bootstrap", rate_flags.bootstrap, "Bootstrap resamples for slope intervals")
      ->check(CLI::NonNegativeNumber);
  add_sim_flags(rates, rate_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kBadFlags;
  }

  try {
    if (*est) return cmd_estimate(est_flags);
    if (*two) return cmd_two_step(two_flags, r1_override);
    if (*dia) return cmd_diagnose(diag_flags, diag);
    if (*simc) return cmd_simulate(sim_flags);
    if (*rates) return cmd_rates(rate_flags);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainFailure;
  }
  return kBadFlags;
}

}  // namespace hdfactor::cli
