#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lrd/errors.hpp"

namespace lrd {

// Dense real symmetric matrix. Full row-major storage; set() writes both
// triangles, so entries(i,j) == entries(j,i) holds exactly at all times.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(int n) : n_(n), data_(checked_size(n), 0.0) {}

  int order() const { return n_; }

  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }

  void set(int i, int j, double v) {
    data_[static_cast<std::size_t>(i) * n_ + j] = v;
    data_[static_cast<std::size_t>(j) * n_ + i] = v;
  }

  const std::vector<double>& data() const { return data_; }

  SymMatrix& operator+=(const SymMatrix& other) {
    require_same_order(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }

  SymMatrix& operator-=(const SymMatrix& other) {
    require_same_order(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }

  SymMatrix& operator*=(double c) {
    for (double& v : data_) v *= c;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double c) { return a *= c; }
  friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }

  bool operator==(const SymMatrix& other) const {
    return n_ == other.n_ && data_ == other.data_;
  }

 private:
  void require_same_order(const SymMatrix& other) const {
    if (n_ != other.n_)
      throw DimensionMismatchError("symmetric matrix orders differ: " + std::to_string(n_) +
                                   " vs " + std::to_string(other.n_));
  }

  static std::size_t checked_size(int n) {
    if (n < 1) throw InvalidDimsError("matrix order must be at least 1");
    return static_cast<std::size_t>(n) * n;
  }

  int n_ = 0;
  std::vector<double> data_;
};

// Diagonal matrix stored as its diagonal. Entries produced by the
// nonnegative-diagonal projector are >= 0; intermediates may be signed.
class DiagMatrix {
 public:
  DiagMatrix() = default;

  explicit DiagMatrix(int n) : diag_(checked_order(n), 0.0) {}

  explicit DiagMatrix(std::vector<double> diag) : diag_(std::move(diag)) {
    checked_order(static_cast<int>(diag_.size()));
  }

  int order() const { return static_cast<int>(diag_.size()); }

  double operator[](int i) const { return diag_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return diag_[static_cast<std::size_t>(i)]; }

  const std::vector<double>& diag() const { return diag_; }

  bool operator==(const DiagMatrix& other) const { return diag_ == other.diag_; }

 private:
  static int checked_order(int n) {
    if (n < 1) throw InvalidDimsError("matrix order must be at least 1");
    return n;
  }

  std::vector<double> diag_;
};

inline DiagMatrix diagonal_of(const SymMatrix& x) {
  DiagMatrix d(x.order());
  for (int i = 0; i < x.order(); ++i) d[i] = x(i, i);
  return d;
}

inline SymMatrix to_sym(const DiagMatrix& d) {
  SymMatrix out(d.order());
  for (int i = 0; i < d.order(); ++i) out.set(i, i, d[i]);
  return out;
}

inline SymMatrix operator-(const SymMatrix& x, const DiagMatrix& d) {
  if (x.order() != d.order())
    throw DimensionMismatchError("symmetric/diagonal orders differ");
  SymMatrix out = x;
  for (int i = 0; i < x.order(); ++i) out.set(i, i, x(i, i) - d[i]);
  return out;
}

inline SymMatrix operator+(const SymMatrix& x, const DiagMatrix& d) {
  if (x.order() != d.order())
    throw DimensionMismatchError("symmetric/diagonal orders differ");
  SymMatrix out = x;
  for (int i = 0; i < x.order(); ++i) out.set(i, i, x(i, i) + d[i]);
  return out;
}

// Builds a symmetric matrix from raw rows, symmetrizing as (X + X^T)/2.
// Asymmetry beyond `symmetry_tol` is rejected; pass a negative tolerance to
// use the default 1e-8 * max|entry| (absorbs file rounding noise).
inline SymMatrix sym_from_rows(const std::vector<std::vector<double>>& rows,
                               double symmetry_tol = -1.0) {
  const int n = static_cast<int>(rows.size());
  if (n < 1) throw NonSquareError("empty matrix");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw NonSquareError("row " + std::to_string(i + 1) + " has " +
                           std::to_string(rows[i].size()) + " entries, expected " +
                           std::to_string(n));
  }

  double max_abs = 0.0;
  double max_asym = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      max_abs = std::max(max_abs, std::abs(rows[i][j]));
      max_asym = std::max(max_asym, std::abs(rows[i][j] - rows[j][i]));
    }
  }
  const double tol = symmetry_tol >= 0.0 ? symmetry_tol : 1e-8 * max_abs;
  if (max_asym > tol)
    throw AsymmetricInputError("input asymmetry " + std::to_string(max_asym) +
                               " exceeds tolerance " + std::to_string(tol));

  SymMatrix out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out.set(i, j, (rows[i][j] + rows[j][i]) / 2.0);
  return out;
}

inline double frobenius_norm(const SymMatrix& x) {
  double sum = 0.0;
  for (double v : x.data()) sum += v * v;
  return std::sqrt(sum);
}

inline double frobenius_norm(const DiagMatrix& d) {
  double sum = 0.0;
  for (double v : d.diag()) sum += v * v;
  return std::sqrt(sum);
}

// Copy with the diagonal zeroed (projection onto the orthogonal complement
// of the diagonal subspace).
inline SymMatrix off_diagonal(const SymMatrix& x) {
  SymMatrix out = x;
  for (int i = 0; i < x.order(); ++i) out.set(i, i, 0.0);
  return out;
}

// Frobenius inner product <X, Y> = sum_ij X_ij Y_ij.
inline double inner(const SymMatrix& x, const SymMatrix& y) {
  if (x.order() != y.order())
    throw DimensionMismatchError("symmetric matrix orders differ");
  double sum = 0.0;
  const auto& a = x.data();
  const auto& b = y.data();
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

}  // namespace lrd
