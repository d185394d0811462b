#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "calirec/types.hpp"

namespace calirec {

/// Splits one CSV line into fields. Handles double-quoted fields with ""
/// escapes (MovieLens titles contain commas). A trailing \r is stripped.
std::vector<std::string> split_csv_line(const std::string& line);

/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

/// Shortest round-trip decimal form of a double. All file output goes
/// through this so reports are byte-stable across runs.
std::string format_double(double value);

double parse_double_field(const std::string& field, const std::string& what,
                          std::size_t line_no);
std::int64_t parse_int_field(const std::string& field, const std::string& what,
                             std::size_t line_no);

/// Header-checked row reader. Calls `row` with the parsed fields and the
/// 1-based line number of each data row. Blank lines are skipped.
void for_each_csv_row(
    const std::string& path, const std::vector<std::string>& expected_header,
    const std::function<void(const std::vector<std::string>&, std::size_t)>& row);

/// Same, but accepts any of the candidate headers; returns the index of the
/// matched one.
std::size_t for_each_csv_row_any_header(
    const std::string& path,
    const std::vector<std::vector<std::string>>& accepted_headers,
    const std::function<void(const std::vector<std::string>&, std::size_t)>& row);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void write_row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace calirec
