#ifndef OPEVAL_CSV_HPP
#define OPEVAL_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace opeval {

// Minimal comma-separated tables: UTF-8, header row, '.' decimal separator,
// no quoting or thousands separators. Row numbers are 1-based and count the
// header, so they match what an editor shows.
struct CsvTable {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each sized like header
  std::vector<std::size_t> row_numbers;        // file line of each data row
};

CsvTable read_csv(const std::filesystem::path& path);

// Field parsers that report "<file>:<row>: ..." on failure.
double parse_double_field(const std::string& field, const CsvTable& table,
                          std::size_t row_index, const std::string& column);
long long parse_int_field(const std::string& field, const CsvTable& table,
                          std::size_t row_index, const std::string& column);

// Shortest round-trip decimal text for a double ("0.25", not "0.250000").
std::string format_double(double value);

}  // namespace opeval

#endif  // OPEVAL_CSV_HPP
