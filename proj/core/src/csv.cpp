#include "handball/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace handball {

namespace {

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string describe(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ':' << line;
  os << ": " << what;
  return os.str();
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, const std::string& what)
    : std::runtime_error(describe(source, line, what)), source_(std::move(source)), line_(line) {}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  out.push_back(was_quoted ? field : trim(field));
  return out;
}

CsvTable CsvTable::parse(std::istream& in, std::string source) {
  CsvTable table;
  table.source_ = std::move(source);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // UTF-8 byte order mark on the first line
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      table.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header_.size()) {
      std::ostringstream os;
      os << "expected " << table.header_.size() << " fields, found " << fields.size();
      throw ParseError(table.source_, lineno, os.str());
    }
    table.rows_.push_back(Row{lineno, std::move(fields)});
  }
  return table;
}

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse(in, path);
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header_.begin());
}

std::size_t CsvTable::require_column(std::string_view name) const {
  auto col = column(name);
  if (!col) throw ParseError(source_, 0, "missing column '" + std::string(name) + "'");
  return *col;
}

const std::string& CsvTable::text(const Row& row, std::size_t col) const { return row.fields.at(col); }

double CsvTable::number(const Row& row, std::size_t col) const {
  const std::string& s = text(row, col);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(source_, row.line, "column '" + header_[col] + "': not a number: '" + s + "'");
  }
  return value;
}

long CsvTable::integer(const Row& row, std::size_t col) const {
  const std::string& s = text(row, col);
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(source_, row.line, "column '" + header_[col] + "': not an integer: '" + s + "'");
  }
  return value;
}

bool CsvTable::boolean(const Row& row, std::size_t col) const {
  std::string s = text(row, col);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw ParseError(source_, row.line, "column '" + header_[col] + "': not a boolean: '" + s + "'");
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string format_fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace handball
