#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rpool::csv {

/// Comma separated table with a mandatory header row. No quoting support;
/// fields are trimmed of surrounding whitespace.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based line number in the source file for each row.
  std::vector<std::size_t> lines;

  /// Index of a named column; throws std::runtime_error when absent.
  std::size_t column(std::string_view name) const;
  /// Index of a named column or -1.
  int find_column(std::string_view name) const;
};

Table read_file(const std::string& path);
Table parse(std::string_view text, const std::string& source = "<memory>");

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string trim(std::string_view s);

/// Strict numeric parsing; throws std::invalid_argument naming the field.
double to_double(const std::string& s);
std::int64_t to_int(const std::string& s);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace rpool::csv
