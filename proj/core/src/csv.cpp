#include "opeval/csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "opeval/error.hpp"

namespace opeval {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string location(const CsvTable& table, std::size_t row_index) {
  return table.source.string() + ":" +
         std::to_string(table.row_numbers[row_index]);
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorClass::kParse, "cannot open file: " + path.string());
  }
  CsvTable table;
  table.source = path;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::vector<std::string> fields = split_fields(line);
    for (std::string& f : fields) f = trim(f);
    bool all_empty = true;
    for (const std::string& f : fields) {
      if (!f.empty()) all_empty = false;
    }
    if (all_empty) continue;  // skip blank lines
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      fail(ErrorClass::kParse,
           path.string() + ":" + std::to_string(line_number) +
               ": expected " + std::to_string(table.header.size()) +
               " fields, got " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.row_numbers.push_back(line_number);
  }
  if (table.header.empty()) {
    fail(ErrorClass::kParse, path.string() + ": missing header row");
  }
  return table;
}

double parse_double_field(const std::string& field, const CsvTable& table,
                          std::size_t row_index, const std::string& column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    fail(ErrorClass::kParse, location(table, row_index) +
                                 ": malformed number in column '" + column +
                                 "': '" + field + "'");
  }
  return value;
}

long long parse_int_field(const std::string& field, const CsvTable& table,
                          std::size_t row_index, const std::string& column) {
  long long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    fail(ErrorClass::kParse, location(table, row_index) +
                                 ": malformed integer in column '" + column +
                                 "': '" + field + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace opeval
