#pragma once

// Comma-separated input with one header row and '.' as decimal separator.

#include "sicdf/dataset.hpp"
#include "sicdf/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sicdf {

namespace csv_detail {

inline std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field(line.data() + start,
                                 (comma == std::string::npos ? line.size() : comma) - start);
    fields.emplace_back(trim(field));
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

inline bool parse_double(std::string_view text, double& out)
{
  if (!text.empty() && text.front() == '+') {
    text.remove_prefix(1);
  }
  if (text.empty()) {
    return false;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

} // namespace csv_detail

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::size_t column(const std::string& name) const
  {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) {
        return c;
      }
    }
    throw ValidationError("csv: missing column '" + name + "'");
  }

  //! Numeric column by name; rejects blank, malformed and non-finite cells.
  std::vector<double> numeric_column(const std::string& name) const
  {
    const std::size_t c = column(name);
    std::vector<double> values(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string cell = c < rows[r].size() ? rows[r][c] : std::string();
      if (!csv_detail::parse_double(cell, values[r])) {
        throw ValidationError("csv: row " + std::to_string(r + 1) + " (line " +
                              std::to_string(line_numbers[r]) + "), column '" + name +
                              "': " + (cell.empty() ? "blank cell" : "not a finite number '" + cell + "'"));
      }
    }
    return values;
  }
};

inline CsvTable read_csv_stream(std::istream& in)
{
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!have_header) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
          static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
      }
      table.header = csv_detail::split(line);
      have_header = true;
      continue;
    }
    if (csv_detail::trim(line).empty()) {
      continue;
    }
    table.rows.push_back(csv_detail::split(line));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) {
    throw ValidationError("csv: empty input");
  }
  return table;
}

inline CsvTable read_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("csv: cannot open '" + path + "'");
  }
  return read_csv_stream(in);
}

//! Dataset whose X columns follow the order of `x_columns`.
inline Dataset dataset_from_table(const CsvTable& table, const std::vector<std::string>& x_columns,
                                  const std::string& y_column)
{
  if (x_columns.empty()) {
    throw ValidationError("csv: no covariate columns selected");
  }
  std::vector<std::vector<double>> cols;
  cols.reserve(x_columns.size());
  for (const auto& name : x_columns) {
    cols.push_back(table.numeric_column(name));
  }
  std::vector<double> y = table.numeric_column(y_column);
  const std::size_t n = y.size();
  const std::size_t d = x_columns.size();
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x[i * d + j] = cols[j][i];
    }
  }
  return Dataset(std::move(x), std::move(y), d);
}

inline Dataset load_csv(const std::string& path, const std::vector<std::string>& x_columns,
                        const std::string& y_column)
{
  return dataset_from_table(read_csv(path), x_columns, y_column);
}

//! A single numeric column, e.g. a time series stored under header `y`.
inline std::vector<double> load_series_csv(const std::string& path, const std::string& column = "y")
{
  return read_csv(path).numeric_column(column);
}

inline std::string to_csv(const Dataset& data, const std::vector<std::string>& x_names,
                          const std::string& y_name = "y")
{
  std::ostringstream out;
  out.precision(17);
  for (const auto& name : x_names) {
    out << name << ',';
  }
  out << y_name << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      out << data.x(i, j) << ',';
    }
    out << data.y(i) << '\n';
  }
  return out.str();
}

} // namespace sicdf
