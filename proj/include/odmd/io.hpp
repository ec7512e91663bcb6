///
/// \file io.hpp
///
/// Snapshot CSV and JSON helpers. CSV layout: header `t,x1,...,xM`, then one
/// row per snapshot, numbers printed with 17 significant digits so doubles
/// round-trip exactly.
///
#ifndef ODMD_IO_HPP
#define ODMD_IO_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "odmd/model.hpp"

namespace odmd::io {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

inline double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(where + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline std::string snapshot_csv(const RealVector& times, const RealMatrix& h) {
  if (times.size() != h.rows()) throw ShapeError("snapshot_csv: times/rows mismatch");
  std::string s = "t";
  for (Index m = 0; m < h.cols(); ++m) s += ",x" + std::to_string(m + 1);
  s += '\n';
  for (Index n = 0; n < h.rows(); ++n) {
    s += format_double(times(n));
    for (Index m = 0; m < h.cols(); ++m) {
      s += ',';
      s += format_double(h(n, m));
    }
    s += '\n';
  }
  return s;
}

inline SnapshotSet parse_snapshot_csv(const std::string& text, const std::string& where = "csv") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(where + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "t")
    throw FormatError(where + ": header must be t,x1,...,xM");
  for (std::size_t m = 1; m < header.size(); ++m)
    if (header[m] != "x" + std::to_string(m))
      throw FormatError(where + ": header must be t,x1,...,xM");
  const std::size_t width = header.size() - 1;

  std::vector<double> times;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    const std::string at = where + ":" + std::to_string(row);
    if (cells.size() != width + 1) throw FormatError(at + ": expected " + std::to_string(width + 1) + " fields");
    times.push_back(parse_double(cells[0], at));
    for (std::size_t m = 1; m <= width; ++m) values.push_back(parse_double(cells[m], at));
  }
  SnapshotSet s;
  const auto rows = static_cast<Index>(times.size());
  s.times = Eigen::Map<const RealVector>(times.data(), rows);
  s.H = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, static_cast<Index>(width));
  return s;
}

inline void write_snapshot_csv(const std::string& path, const RealVector& times, const RealMatrix& h) {
  write_file(path, snapshot_csv(times, h));
}

inline SnapshotSet read_snapshot_csv(const std::string& path) {
  return parse_snapshot_csv(read_file(path), path);
}

inline Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(where + ": " + e.what());
  }
}

inline Json read_json(const std::string& path) { return parse_json(read_file(path), path); }

inline void write_json(const std::string& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

/// Non-finite values become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json complex_json(Complex z) { return Json{{"re", number(z.real())}, {"im", number(z.imag())}}; }

inline Json complex_vector_json(const ComplexVector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(complex_json(v(i)));
  return arr;
}

inline Json complex_matrix_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(complex_vector_json(m.row(i).transpose()));
  return rows;
}

inline Complex complex_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_object() || !j.contains("re") || !j.contains("im") || !j["re"].is_number() ||
      !j["im"].is_number())
    throw FormatError(where + ": complex values must be {\"re\": x, \"im\": y}");
  return {j["re"].get<double>(), j["im"].get<double>()};
}

inline ComplexVector complex_vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array of complex values");
  ComplexVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = complex_from_json(j[i], where);
  return v;
}

}  // namespace odmd::io

#endif  // ODMD_IO_HPP
