#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lrd/errors.hpp"
#include "lrd/spectral.hpp"
#include "lrd/sym_matrix.hpp"

namespace lrd {

// Rank cap for the PSD low-rank constraint set.
struct RankBudget {
  int r;
};

inline void check_rank(RankBudget rank, int n) {
  if (rank.r < 1 || rank.r > n)
    throw RankOutOfRangeError("rank " + std::to_string(rank.r) + " outside [1, " +
                              std::to_string(n) + "]");
}

// Frobenius-nearest PSD matrix of rank at most r: keep the r largest
// eigenvalues where positive, zero the rest. With fewer than r positive
// eigenvalues the result has rank below r, which is allowed.
inline SymMatrix project_low_rank_psd(const SymMatrix& x, RankBudget rank,
                                      const JacobiOptions& opts = {}) {
  const int n = x.order();
  check_rank(rank, n);
  const SpectralDecomp eig = spectral_decompose(x, opts);

  SymMatrix out(n);
  std::vector<double> col(n);
  for (int k = 0; k < rank.r; ++k) {
    const double s = eig.eigenvalues[k];
    if (s <= 0.0) break;  // eigenvalues are sorted, nothing positive remains
    for (int i = 0; i < n; ++i) col[i] = eig.eigenvectors(i, k);
    for (int i = 0; i < n; ++i) {
      const double si = s * col[i];
      for (int j = i; j < n; ++j) out.set(i, j, out(i, j) + si * col[j]);
    }
  }
  return out;
}

// Frobenius-nearest nonnegative diagonal matrix: clamp the diagonal at zero,
// drop the off-diagonal.
inline DiagMatrix project_diag_psd(const SymMatrix& x) {
  DiagMatrix out(x.order());
  for (int i = 0; i < x.order(); ++i) {
    const double v = x(i, i);
    out[i] = v > 0.0 ? v : 0.0;
  }
  return out;
}

// Projection onto the translated set sigma - {nonnegative diagonals}: the
// off-diagonal is forced to sigma's, each diagonal entry keeps X_ii while it
// is below sigma_ii and saturates at sigma_ii otherwise.
inline SymMatrix project_translated_diag(const SymMatrix& x, const SymMatrix& sigma) {
  if (x.order() != sigma.order())
    throw DimensionMismatchError("projection input and sigma orders differ");
  SymMatrix out = sigma;
  for (int i = 0; i < x.order(); ++i) {
    const double xi = x(i, i);
    if (xi < sigma(i, i)) out.set(i, i, xi);
  }
  return out;
}

}  // namespace lrd
