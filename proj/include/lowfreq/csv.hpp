#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "error.hpp"

namespace lowfreq::csv {

// Shortest representation that parses back to the same double.
inline std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}

// Splits one RFC 4180 style line. Embedded newlines are not supported.
inline std::vector<std::string> split_row(std::string_view line, std::size_t line_no = 0) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

inline double parse_real(std::string_view s, std::size_t line_no, std::string_view what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ParseError(line_no, "bad numeric value for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view s, std::size_t line_no, std::string_view what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ParseError(line_no, "bad integer value for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

inline bool parse_bool(std::string_view s, std::size_t line_no, std::string_view what) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError(line_no, "bad boolean value for " + std::string(what) + ": '" + std::string(s) + "'");
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;

  const std::string& operator[](std::size_t i) const { return fields[i]; }
};

// Reads a CSV with a header row and checks the header matches `expected`.
inline std::vector<Row> read_table(std::istream& in,
                                                        const std::vector<std::string>& expected) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing CSV header");
  ++line_no;
  auto header = split_row(line, line_no);
  if (header != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
    throw ParseError(line_no, "unexpected CSV header, want '" + want + "'");
  }
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto row = split_row(line, line_no);
    if (row.size() != expected.size())
      throw ParseError(line_no, "expected " + std::to_string(expected.size()) + " fields, got " +
                                    std::to_string(row.size()));
    rows.push_back(Row{line_no, std::move(row)});
  }
  return rows;
}

}  // namespace lowfreq::csv
