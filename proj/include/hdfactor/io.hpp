#pragma once

#include "hdfactor/diagnostics.hpp"
#include "hdfactor/factor_model.hpp"
#include "hdfactor/simulation.hpp"
#include "hdfactor/studies.hpp"
#include "hdfactor/types.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hdfactor {

/// Shortest-safe round-trip text: 17 significant digits, '.' decimal point.
std::string format_double(double value);

/// Strict decimal parse of a whole cell (surrounding blanks allowed).
std::optional<double> parse_number(const std::string& text);

void write_text_file(const std::string& path, const std::string& contents);

namespace io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "hdfactor";
inline constexpr const char* kToolVersion = "1.0.0";

Json metadata();

Json to_json(const FactorModel<double>& model);
Json to_json(const sim::Scenario& scenario);
Json to_json(const sim::McResult& result);

/// Matrix as {rows, cols, data} with data row-major.
Json matrix_json(const Matrix<double>& m, bool with_data = true);

/// index,lambda for every eigenvalue.
std::string eigenvalues_csv(const Vector<double>& eigenvalues);
/// index,lambda,ratio for each i with a defined ratio lambda_{i+1}/lambda_i.
std::string ratios_csv(const Vector<double>& eigenvalues);
std::string matrix_csv(const Matrix<double>& m);
std::string acf_csv(const AcfReport<double>& report);
/// scenario_id,n,p,rep,index,value
std::string traces_header();
void append_traces(std::string& out, const std::string& scenario_id, Index n, Index p,
                   const std::vector<std::vector<double>>& traces);
std::string slopes_csv(const std::vector<Index>& tracked, const std::vector<sim::SlopeFit>& fits);

/// Monte Carlo job description read from a scenario file.
struct StudyConfig {
  enum class Kind { rank, table1, two_step, ratio_trace, eigen_error };
  Kind kind = Kind::rank;
  sim::Scenario scenario;
  Index reps = 200;
  std::vector<Index> n_grid;
  std::vector<sim::DimensionRule> p_rules;
  std::vector<double> table_deltas;
  std::vector<Index> tracked;
};

std::string to_string(StudyConfig::Kind kind);

/// Flat "key = value" lines ('#' comments) or a JSON object with the same
/// keys. Keys: study, preset (S1|S2|S3), name, n, p, r, deltas, ar_coeffs,
/// noise_variance, k0, loading_scheme, seed, reps, n_grid, p_rule, p_rules,
/// table_deltas, tracked. List values are comma-separated.
StudyConfig parse_study_config(const std::string& text);
StudyConfig load_study_config(const std::string& path);

std::vector<Index> parse_index_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace io
}  // namespace hdfactor
