#include "calirec/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <system_error>

namespace calirec {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  std::size_t end = line.size();
  if (end > 0 && line[end - 1] == '\r') --end;
  for (std::size_t i = 0; i < end; ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < end && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double_field(const std::string& field, const std::string& what,
                          std::size_t line_no) {
  double value = 0.0;
  auto first = field.data();
  auto last = field.data() + field.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || field.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + what +
                    " value '" + field + "'");
  }
  return value;
}

std::int64_t parse_int_field(const std::string& field, const std::string& what,
                             std::size_t line_no) {
  std::int64_t value = 0;
  auto first = field.data();
  auto last = field.data() + field.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || field.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + what +
                    " value '" + field + "'");
  }
  return value;
}

std::size_t for_each_csv_row_any_header(
    const std::string& path,
    const std::vector<std::vector<std::string>>& accepted_headers,
    const std::function<void(const std::vector<std::string>&, std::size_t)>& row) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": missing header");
  auto header = split_csv_line(line);
  std::size_t matched = accepted_headers.size();
  for (std::size_t h = 0; h < accepted_headers.size(); ++h) {
    if (header == accepted_headers[h]) {
      matched = h;
      break;
    }
  }
  if (matched == accepted_headers.size()) {
    throw DataError(path + ": unexpected header '" + line + "'");
  }
  std::size_t line_no = 1;
  std::size_t n_cols = accepted_headers[matched].size();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != n_cols) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(n_cols) + " fields, got " +
                      std::to_string(fields.size()));
    }
    row(fields, line_no);
  }
  return matched;
}

void for_each_csv_row(
    const std::string& path, const std::vector<std::string>& expected_header,
    const std::function<void(const std::vector<std::string>&, std::size_t)>& row) {
  for_each_csv_row_any_header(path, {expected_header}, row);
}

CsvWriter::CsvWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw DataError("cannot open " + path + " for writing");
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw DataError("failed writing " + path_);
}

}  // namespace calirec
