#include "hdfactor/io.hpp"

#include "hdfactor/ratio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hdfactor {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace io {

namespace {

Json vector_json(const Vector<double>& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const auto v = parse_number(text);
  if (!v) throw ParseError("scenario key '" + key + "': not a number: '" + text + "'");
  return *v;
}

Index to_index(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw ParseError("scenario key '" + key + "': not an integer: '" + text + "'");
  }
  return static_cast<Index>(v);
}

std::uint64_t to_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size()) throw ParseError("bad seed");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("scenario key 'seed': not a 64-bit integer: '" + text + "'");
  }
}

std::map<std::string, std::string> flatten_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario JSON must be an object");
  std::map<std::string, std::string> out;
  auto scalar = [](const Json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return format_double(v.get<double>());
    throw ParseError("scenario JSON values must be numbers, strings or arrays of them");
  };
  for (const auto& [key, value] : doc.items()) {
    if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) joined += (joined.empty() ? "" : ",") + scalar(item);
      out[key] = joined;
    } else {
      out[key] = scalar(value);
    }
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  Index line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) eq = line.find(':');
    if (eq == std::string::npos) {
      throw ParseError("scenario line " + std::to_string(line_no) + ": expected key = value", line_no, -1);
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace

Json metadata() {
  Json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["generator"] = sim::kGeneratorName;
  return m;
}

Json matrix_json(const Matrix<double>& m, bool with_data) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  if (with_data) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    j["data"] = std::move(data);
  }
  return j;
}

Json to_json(const FactorModel<double>& model) {
  Json j;
  j["r_hat"] = model.r_hat;
  j["method"] = to_string(model.method);
  j["k0"] = model.k0;
  j["R"] = model.max_ratio_index;
  j["centering"] = model.centering == Centering::full_sample ? "full-sample" : "window";
  j["eigenvalues"] = vector_json(model.eigenvalues);
  j["ratios"] = vector_json(model.ratios);
  if (model.method == Method::two_step) {
    j["r1_hat"] = model.r1_hat;
    j["r2_hat"] = model.r2_hat;
    j["second_eigenvalues"] = vector_json(model.second_eigenvalues);
    j["second_ratios"] = vector_json(model.second_ratios);
    j["flat_second_pass"] = model.flat_second_pass;
  }
  j["loadings"] = matrix_json(model.loadings);
  j["factors"] = matrix_json(model.factors, false);
  Json residual;
  const double count = double(std::max<Index>(model.residuals.size(), 1));
  residual["rows"] = model.residuals.rows();
  residual["cols"] = model.residuals.cols();
  residual["frobenius_norm"] = model.residuals.norm();
  residual["max_abs"] = model.residuals.size() ? model.residuals.cwiseAbs().maxCoeff() : 0.0;
  residual["mean_square"] = model.residuals.squaredNorm() / count;
  j["residuals"] = std::move(residual);
  return j;
}

Json to_json(const sim::Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["n"] = s.n;
  j["p"] = s.p;
  j["r"] = s.r;
  j["deltas"] = s.deltas;
  j["ar_coeffs"] = s.ar_coeffs;
  j["noise_variance"] = s.noise_variance;
  j["k0"] = s.k0;
  j["loading_scheme"] = sim::to_string(s.loading_scheme);
  j["seed"] = s.seed;
  return j;
}

namespace {
Json counts_json(const std::map<Index, Index>& counts) {
  Json j = Json::object();
  for (const auto& [r, c] : counts) j[std::to_string(r)] = c;
  return j;
}
}  // namespace

Json to_json(const sim::McResult& result) {
  Json j;
  j["scenario"] = to_json(result.scenario);
  j["reps"] = result.reps;
  j["r_hat_counts"] = counts_json(result.r_hat_counts);
  j["freq_correct"] = result.freq_correct;
  j["r_hat"] = result.r_hat;
  if (result.two_step) {
    Json t;
    t["r_hat_counts"] = counts_json(result.two_step->r_hat_counts);
    t["freq_correct"] = result.two_step->freq_correct;
    t["r1_hat"] = result.two_step->r1;
    t["r2_hat"] = result.two_step->r2;
    j["two_step"] = std::move(t);
  }
  return j;
}

std::string eigenvalues_csv(const Vector<double>& eigenvalues) {
  std::string out = "index,lambda\n";
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(eigenvalues(i)) + "\n";
  }
  return out;
}

std::string ratios_csv(const Vector<double>& eigenvalues) {
  std::string out = "index,lambda,ratio\n";
  if (eigenvalues.size() < 2) return out;
  const Vector<double> ratios = eigen_ratios(eigenvalues);
  for (Index i = 0; i < ratios.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(eigenvalues(i)) + "," + format_double(ratios(i)) + "\n";
  }
  return out;
}

std::string matrix_csv(const Matrix<double>& m) {
  std::string out;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string acf_csv(const AcfReport<double>& report) {
  std::string out = "i,j,lag,value,band\n";
  const std::string band = format_double(report.band);
  const auto m = report.series_ids.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (Index k = 0; k <= report.max_lag; ++k) {
        out += std::to_string(report.series_ids[i]) + "," + std::to_string(report.series_ids[j]) + "," +
               std::to_string(k) + "," +
               format_double(report.at(static_cast<Index>(i), static_cast<Index>(j), k)) + "," + band + "\n";
      }
    }
  }
  return out;
}

std::string traces_header() { return "scenario_id,n,p,rep,index,value\n"; }

void append_traces(std::string& out, const std::string& scenario_id, Index n, Index p,
                   const std::vector<std::vector<double>>& traces) {
  const std::string prefix = scenario_id + "," + std::to_string(n) + "," + std::to_string(p) + ",";
  for (std::size_t rep = 0; rep < traces.size(); ++rep) {
    for (std::size_t i = 0; i < traces[rep].size(); ++i) {
      out += prefix + std::to_string(rep) + "," + std::to_string(i + 1) + "," + format_double(traces[rep][i]) + "\n";
    }
  }
}

std::string slopes_csv(const std::vector<Index>& tracked, const std::vector<sim::SlopeFit>& fits) {
  std::string out = "j,slope,ci_low,ci_high\n";
  for (std::size_t k = 0; k < fits.size(); ++k) {
    out += std::to_string(tracked[k]) + "," + format_double(fits[k].slope) + "," + format_double(fits[k].ci_low) +
           "," + format_double(fits[k].ci_high) + "\n";
  }
  return out;
}

std::string to_string(StudyConfig::Kind kind) {
  switch (kind) {
    case StudyConfig::Kind::rank: return "rank";
    case StudyConfig::Kind::table1: return "table1";
    case StudyConfig::Kind::two_step: return "two-step";
    case StudyConfig::Kind::ratio_trace: return "ratio-trace";
    case StudyConfig::Kind::eigen_error: return "eigen-error";
  }
  return "rank";
}

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  for (const auto& item : split_list(text)) out.push_back(to_index("list", item));
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(to_double("list", item));
  return out;
}

StudyConfig parse_study_config(const std::string& text) {
  const std::string body = trim(text);
  auto kv = (!body.empty() && body.front() == '{') ? flatten_json(body) : parse_key_values(body);

  StudyConfig cfg;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  if (auto v = take("study")) {
    const std::string s = *v;
    if (s == "rank") cfg.kind = StudyConfig::Kind::rank;
    else if (s == "table1") cfg.kind = StudyConfig::Kind::table1;
    else if (s == "two-step") cfg.kind = StudyConfig::Kind::two_step;
    else if (s == "ratio-trace") cfg.kind = StudyConfig::Kind::ratio_trace;
    else if (s == "eigen-error") cfg.kind = StudyConfig::Kind::eigen_error;
    else throw ParseError("unknown study '" + s + "'");
  }

  sim::Scenario& sc = cfg.scenario;
  if (auto v = take("preset")) {
    if (*v == "S1") sc = sim::scenario_s1(sc.n, sc.p);
    else if (*v == "S2") sc = sim::scenario_s2(sc.n, sc.p);
    else if (*v == "S3") sc = sim::scenario_s3(sc.n, sc.p);
    else throw ParseError("unknown preset '" + *v + "' (expected S1, S2 or S3)");
  }
  if (auto v = take("name")) sc.name = *v;
  if (auto v = take("n")) sc.n = to_index("n", *v);
  if (auto v = take("p")) sc.p = to_index("p", *v);
  if (auto v = take("r")) sc.r = to_index("r", *v);
  if (auto v = take("deltas")) sc.deltas = parse_double_list(*v);
  if (auto v = take("ar_coeffs")) sc.ar_coeffs = parse_double_list(*v);
  if (auto v = take("noise_variance")) sc.noise_variance = to_double("noise_variance", *v);
  if (auto v = take("k0")) sc.k0 = to_index("k0", *v);
  if (auto v = take("loading_scheme")) sc.loading_scheme = sim::parse_loading_scheme(*v);
  if (auto v = take("seed")) sc.seed = to_seed(*v);
  if (auto v = take("reps")) cfg.reps = to_index("reps", *v);
  if (auto v = take("n_grid")) cfg.n_grid = parse_index_list(*v);
  if (auto v = take("p_rule")) cfg.p_rules = {sim::parse_dimension_rule(*v)};
  if (auto v = take("p_rules")) {
    cfg.p_rules.clear();
    for (const auto& item : split_list(*v)) cfg.p_rules.push_back(sim::parse_dimension_rule(item));
  }
  if (auto v = take("table_deltas")) cfg.table_deltas = parse_double_list(*v);
  if (auto v = take("tracked")) cfg.tracked = parse_index_list(*v);

  if (!kv.empty()) throw ParseError("unknown scenario key '" + kv.begin()->first + "'");
  if (cfg.reps < 1) throw ParseError("reps must be >= 1");
  return cfg;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_study_config(ss.str());
}

}  // namespace io
}  // namespace hdfactor
