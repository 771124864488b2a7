#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace handball {

/// Thrown on malformed tabular input. `line()` is the 1-based line number in
/// the source file (0 when the error is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// A comma-separated table with a header row. Quoted fields and embedded
/// commas are supported; lines starting with '#' are comments.
class CsvTable {
 public:
  struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
  };

  static CsvTable parse(std::istream& in, std::string source = "<stream>");
  static CsvTable read_file(const std::string& path);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  const std::string& source() const noexcept { return source_; }

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;

  double number(const Row& row, std::size_t col) const;
  long integer(const Row& row, std::size_t col) const;
  bool boolean(const Row& row, std::size_t col) const;
  const std::string& text(const Row& row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

/// Shortest round-trippable decimal form of `x` ("%.17g" trimmed).
std::string format_number(double x);

/// Fixed-point formatting with `digits` decimals.
std::string format_fixed(double x, int digits);

}  // namespace handball
