#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lrd/errors.hpp"
#include "lrd/sym_matrix.hpp"

namespace lrd {

enum class MatrixFileFormat { DenseCsv, WhitespaceMatrix };

struct MatrixFile {
  std::string path;
  MatrixFileFormat format = MatrixFileFormat::DenseCsv;
};

namespace detail {

inline bool parse_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*end))) return false;
    ++end;
  }
  return true;
}

inline std::vector<std::string> split_line(const std::string& line, MatrixFileFormat format) {
  std::vector<std::string> tokens;
  if (format == MatrixFileFormat::DenseCsv) {
    std::string current;
    std::istringstream ss(line);
    while (std::getline(ss, current, ',')) tokens.push_back(current);
  } else {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
  }
  return tokens;
}

inline bool blank(const std::string& line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace detail

// Format sniffing: a comma anywhere means dense CSV, otherwise
// whitespace-separated columns.
inline MatrixFileFormat detect_format(const std::string& first_line) {
  return first_line.find(',') != std::string::npos ? MatrixFileFormat::DenseCsv
                                                   : MatrixFileFormat::WhitespaceMatrix;
}

namespace detail {

// Core reader; `forced` skips content sniffing when the caller has declared
// the format. A header row is skipped when the first token of the first
// line is not numeric. Non-finite values are rejected.
inline std::vector<std::vector<double>> read_rows_impl(const std::string& path,
                                                       const MatrixFileFormat* forced) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  bool first_content_line = true;
  MatrixFileFormat format = forced ? *forced : MatrixFileFormat::DenseCsv;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    if (first_content_line && !forced) format = detect_format(line);

    const auto tokens = detail::split_line(line, format);
    if (tokens.empty()) continue;

    double value = 0.0;
    if (first_content_line && !detail::parse_double(tokens.front(), value)) {
      first_content_line = false;
      continue;  // header row
    }
    first_content_line = false;

    std::vector<double> row;
    row.reserve(tokens.size());
    for (const auto& tok : tokens) {
      if (!detail::parse_double(tok, value))
        throw ParseError(path + ":" + std::to_string(line_no) + ": not a number: '" + tok + "'");
      if (!std::isfinite(value))
        throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite value");
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw ParseError(path + ": no data rows");
  return rows;
}

}  // namespace detail

inline std::vector<std::vector<double>> read_matrix_rows(const std::string& path) {
  return detail::read_rows_impl(path, nullptr);
}

inline std::vector<std::vector<double>> read_matrix_rows(const MatrixFile& file) {
  return detail::read_rows_impl(file.path, &file.format);
}

inline SymMatrix read_sym_matrix(const std::string& path, double symmetry_tol = -1.0) {
  return sym_from_rows(read_matrix_rows(path), symmetry_tol);
}

inline SymMatrix read_sym_matrix(const MatrixFile& file, double symmetry_tol = -1.0) {
  return sym_from_rows(read_matrix_rows(file), symmetry_tol);
}

namespace detail {

// %.17g round-trips doubles exactly.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename EntryFn>
void write_dense_csv(const std::string& path, int n, EntryFn entry) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      out << format_value(entry(i, j));
    }
    out << '\n';
  }
}

}  // namespace detail

inline void write_matrix_csv(const std::string& path, const SymMatrix& x) {
  detail::write_dense_csv(path, x.order(), [&](int i, int j) { return x(i, j); });
}

inline void write_matrix_csv(const std::string& path, const DiagMatrix& d) {
  detail::write_dense_csv(path, d.order(), [&](int i, int j) { return i == j ? d[i] : 0.0; });
}

}  // namespace lrd
