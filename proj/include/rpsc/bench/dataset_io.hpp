// Dataset files.
//
// CSV: one point per row, comma-separated decimal floats, no header.
// Labels: one integer per line, aligned with the point rows.
// Binary: "DRSC", u32 version (1), u64 rows (points N), u64 cols (dim m),
//         then N*m little-endian float64 values, point-major.
#pragma once

#include "rpsc/core.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace rpsc::bench {

namespace detail {

inline std::string format_exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view field, std::size_t line, std::size_t column) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                     ": not a number: '" + std::string(field) + "'");
  return v;
}

template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is, const char* what) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw ParseError(std::string("binary dataset truncated while reading ") + what + " at offset " +
                     std::to_string(static_cast<long long>(is.gcount())));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

/// Writes the columns of `points` (m x N) as N CSV rows.
inline void save_points_csv(const std::string& path, const Matrix& points) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  for (Index j = 0; j < points.cols(); ++j) {
    for (Index i = 0; i < points.rows(); ++i) {
      if (i) os << ',';
      os << detail::format_exact(points(i, j));
    }
    os << '\n';
  }
}

/// Returns an m x N matrix (one column per CSV row).
inline Matrix load_points_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::size_t start = 0, column = 1;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      row.push_back(detail::parse_double(field, lineno, column));
      if (comma == std::string::npos) break;
      start = comma + 1;
      ++column;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                       " values, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("'" + path + "' contains no data points");
  Matrix out(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[j][i];
  return out;
}

inline void save_points_binary(const std::string& path, const Matrix& points) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  os.write("DRSC", 4);
  detail::put_le<std::uint32_t>(os, 1);
  detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(points.cols()));
  detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(points.rows()));
  for (Index j = 0; j < points.cols(); ++j)
    for (Index i = 0; i < points.rows(); ++i) detail::put_le<double>(os, points(i, j));
}

inline Matrix load_points_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "DRSC", 4) != 0)
    throw ParseError("'" + path + "': bad magic at offset 0 (expected DRSC)");
  const auto version = detail::get_le<std::uint32_t>(is, "version");
  if (version != 1) throw ParseError("'" + path + "': unsupported version " + std::to_string(version) + " at offset 4");
  const auto n = detail::get_le<std::uint64_t>(is, "row count");
  const auto m = detail::get_le<std::uint64_t>(is, "column count");
  Matrix out(static_cast<Index>(m), static_cast<Index>(n));
  for (std::uint64_t j = 0; j < n; ++j)
    for (std::uint64_t i = 0; i < m; ++i) {
      if (is.peek() == std::char_traits<char>::eof())
        throw ParseError("'" + path + "': truncated payload at offset " +
                         std::to_string(24 + 8 * (j * m + i)));
      out(static_cast<Index>(i), static_cast<Index>(j)) = detail::get_le<double>(is, "payload");
    }
  return out;
}

inline bool is_binary_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  char magic[4] = {};
  return is.read(magic, 4) && std::memcmp(magic, "DRSC", 4) == 0;
}

/// Loads either format, sniffing the magic bytes.
inline Matrix load_points(const std::string& path) {
  return is_binary_dataset(path) ? load_points_binary(path) : load_points_csv(path);
}

inline void save_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  for (int l : labels) os << l << '\n';
}

/// Reads one integer per line; if expected >= 0, the count must match.
inline std::vector<int> load_labels(const std::string& path, Index expected = -1) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open '" + path + "'");
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s(line);
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    if (s.empty()) continue;
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ParseError("labels line " + std::to_string(lineno) + ": not an integer: '" + std::string(s) + "'");
    labels.push_back(v);
  }
  if (expected >= 0 && static_cast<Index>(labels.size()) != expected)
    throw ParseError("labels file '" + path + "' has " + std::to_string(labels.size()) + " entries, expected " +
                     std::to_string(expected) + " (line " + std::to_string(lineno + 1) + ")");
  return labels;
}

}  // namespace rpsc::bench
