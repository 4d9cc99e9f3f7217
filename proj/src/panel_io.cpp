#include "hdfactor/io.hpp"
#include "hdfactor/panel.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hdfactor {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  if (line.empty()) cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::optional<double> parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  double value = 0;
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

Orientation parse_orientation(const std::string& text) {
  if (text == "time-rows") return Orientation::time_rows;
  if (text == "series-rows") return Orientation::series_rows;
  throw DomainError("unknown orientation '" + text + "' (expected time-rows or series-rows)");
}

Panel load_csv(const std::string& path, Orientation orientation) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (rows.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    rows.push_back(split_row(line));
  }
  if (rows.empty()) throw DimensionError("'" + path + "' contains no data");

  bool header = false;
  for (const auto& cell : rows.front()) header = header || !parse_number(cell);
  const std::size_t first_data = header ? 1 : 0;
  if (first_data >= rows.size()) throw DimensionError("'" + path + "' has a header but no data rows");
  const bool label_column = !parse_number(rows[first_data].front());

  const std::size_t width = rows[first_data].size();
  const std::size_t skip = label_column ? 1 : 0;
  if (width <= skip) throw DimensionError("'" + path + "' has no numeric columns");

  const auto data_rows = static_cast<Index>(rows.size() - first_data);
  const auto data_cols = static_cast<Index>(width - skip);
  Matrix<double> table(data_rows, data_cols);
  std::vector<std::string> row_labels;
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    const Index file_row = static_cast<Index>(r + 1);
    if (rows[r].size() != width) {
      throw ParseError("'" + path + "' row " + std::to_string(file_row) + " has " +
                           std::to_string(rows[r].size()) + " cells, expected " + std::to_string(width),
                       file_row, -1);
    }
    if (label_column) row_labels.push_back(trim(rows[r][0]));
    for (std::size_t c = skip; c < width; ++c) {
      const auto value = parse_number(rows[r][c]);
      const Index file_col = static_cast<Index>(c + 1);
      if (!value || !std::isfinite(*value)) {
        throw ParseError("'" + path + "' cell (" + std::to_string(file_row) + "," + std::to_string(file_col) +
                             ") is not a finite number: '" + rows[r][c] + "'",
                         file_row, file_col);
      }
      table(static_cast<Index>(r - first_data), static_cast<Index>(c - skip)) = *value;
    }
  }

  std::optional<std::vector<std::string>> column_labels;
  if (header) {
    if (rows.front().size() != width) {
      throw ParseError("'" + path + "' header has " + std::to_string(rows.front().size()) +
                           " cells, expected " + std::to_string(width),
                       1, -1);
    }
    column_labels.emplace();
    for (std::size_t c = skip; c < width; ++c) column_labels->push_back(trim(rows.front()[c]));
  }
  std::optional<std::vector<std::string>> line_labels;
  if (label_column) line_labels = std::move(row_labels);

  if (orientation == Orientation::time_rows) {
    return Panel(table.transpose(), std::move(column_labels), std::move(line_labels));
  }
  return Panel(std::move(table), std::move(line_labels), std::move(column_labels));
}

void save_csv(const Panel& panel, const std::string& path, Orientation orientation) {
  const bool time_rows = orientation == Orientation::time_rows;
  const Matrix<double> table = time_rows ? Matrix<double>(panel.values().transpose()) : panel.values();
  const auto& col_labels = time_rows ? panel.series_labels() : panel.time_labels();
  const auto& row_labels = time_rows ? panel.time_labels() : panel.series_labels();

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  if (col_labels) {
    if (row_labels) out << "label";
    for (std::size_t c = 0; c < col_labels->size(); ++c) {
      if (c > 0 || row_labels) out << ',';
      out << (*col_labels)[c];
    }
    out << '\n';
  }
  for (Index r = 0; r < table.rows(); ++r) {
    if (row_labels) out << (*row_labels)[static_cast<std::size_t>(r)] << ',';
    for (Index c = 0; c < table.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(table(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace hdfactor
