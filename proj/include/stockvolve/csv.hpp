#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stockvolve::csv {

// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double value);

std::vector<std::string> split_line(std::string_view line, char sep = ',');

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  // Index of a header column; throws ParseError if absent.
  std::size_t column(std::string_view name) const;
};

Table read_table(const std::filesystem::path& path);
Table parse_table(std::istream& in, const std::string& source_name);

// Strict numeric parse of a whole field; throws ParseError mentioning `where`.
double parse_double(std::string_view field, const std::string& where);

void write_row(std::ostream& out, const std::vector<double>& values);

}  // namespace stockvolve::csv
