#pragma once

#include <string>
#include <utility>
#include <vector>

// Plain CSV tables with '#'-prefixed metadata lines. Numbers are written with
// nine significant digits so identical runs give identical bytes.

namespace qdc::csv {

/// printf("%.9g"); NaN and infinities as nan, inf, -inf.
std::string format_number(double v);

struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_meta(std::string key, std::string value);
  /// Appends a row of numbers; the width must match the header.
  void add_row(const std::vector<double>& values);
  void add_row(std::vector<std::string> cells);

  std::string to_string() const;
};

/// Writes to a sibling temporary file and renames it over path.
/// Throws std::runtime_error on I/O failure.
void write_atomic(const std::string& path, const std::string& content);

/// Numeric table read back from a file: '#' lines become metadata, the first
/// remaining line is the header. Empty or non-numeric cells parse as NaN.
struct NumericTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header name, or -1.
  int column(const std::string& name) const;
  std::vector<double> values(int column) const;
};

/// Throws std::runtime_error if the file cannot be read and
/// std::invalid_argument on ragged rows or a missing header.
NumericTable read_numeric(const std::string& path);

}  // namespace qdc::csv
