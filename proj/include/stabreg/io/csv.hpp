#pragma once

// Dense CSV matrices: optional header line "rows,cols,range", then one line
// per row of comma-separated decimals. Output uses 17 significant digits.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stabreg/core.hpp"

namespace stabreg::io {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string matrix_to_csv(const ValueMatrix& f) {
  std::string out = std::to_string(f.rows()) + "," + std::to_string(f.cols()) + "," + to_string(f.range()) + "\n";
  for (Index a = 0; a < f.rows(); ++a) {
    for (Index b = 0; b < f.cols(); ++b) {
      if (b) out += ',';
      out += format_double(f(a, b));
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t' && c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_entry(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InputError("");
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line_no) + ": malformed number '" + s + "'");
  }
}

inline std::size_t parse_count(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw InputError("malformed matrix header count '" + s + "'");
  return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace detail

// Without a header the shape comes from the data and the range is unit when
// every entry lies in [0,1], signed otherwise.
inline ValueMatrix matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::optional<std::size_t> hr, hc;
  std::optional<Range> hrange;
  std::size_t line_no = 0, first_data_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = detail::split_fields(line);
    if (rows.empty() && !hr && fields.size() == 3 && (fields[2] == "unit" || fields[2] == "signed")) {
      hr = detail::parse_count(fields[0]);
      hc = detail::parse_count(fields[1]);
      hrange = fields[2] == "unit" ? Range::unit : Range::signed_unit;
      continue;
    }
    if (rows.empty()) first_data_line = line_no;
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw InputError("matrix file has no data rows");
  const std::size_t cols = rows.front().size();
  std::vector<double> e;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw InputError("row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                       " entries, expected " + std::to_string(cols));
    for (const auto& s : rows[i]) e.push_back(detail::parse_entry(s, first_data_line + i));
  }
  if (hr && (*hr != rows.size() || *hc != cols))
    throw InputError("header shape " + std::to_string(*hr) + "x" + std::to_string(*hc) +
                     " does not match data shape " + std::to_string(rows.size()) + "x" + std::to_string(cols));
  Range range = Range::unit;
  if (hrange)
    range = *hrange;
  else
    for (double v : e)
      if (v < 0.0) range = Range::signed_unit;
  return ValueMatrix(rows.size(), cols, std::move(e), range);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path + "'");
}

inline ValueMatrix read_matrix(const std::string& path) { return matrix_from_csv(read_file(path)); }

inline void write_matrix(const std::string& path, const ValueMatrix& f) { write_file(path, matrix_to_csv(f)); }

// Hash of the canonical serialization, so formatting differences in the
// source file do not matter.
inline std::string matrix_hash(const ValueMatrix& f) { return "fnv1a64:" + hex64(fnv1a64(matrix_to_csv(f))); }

}  // namespace stabreg::io
