#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "lrd/dense_matrix.hpp"
#include "lrd/errors.hpp"
#include "lrd/sym_matrix.hpp"

namespace lrd {

// Eigendecomposition X = U diag(s) U^T with eigenvalues sorted in
// non-increasing order and orthonormal eigenvector columns.
struct SpectralDecomp {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;  // column i pairs with eigenvalues[i]
};

struct JacobiOptions {
  int max_sweeps = 100;
  // Sweeps stop once max off-diagonal magnitude <= tol_factor * ||X||_F.
  double tol_factor = 1e-12;
};

// Cyclic Jacobi eigensolver for dense symmetric matrices. Rotations below
// the stopping threshold are skipped, which keeps late sweeps cheap once
// quadratic convergence kicks in.
inline SpectralDecomp spectral_decompose(const SymMatrix& x, const JacobiOptions& opts = {}) {
  const int n = x.order();
  const std::size_t nn = static_cast<std::size_t>(n);
  std::vector<double> a(x.data());  // working copy, both triangles kept in sync
  // Accumulated rotations, stored transposed: row i of vt is eigenvector i.
  std::vector<double> vt(nn * nn, 0.0);
  for (int i = 0; i < n; ++i) vt[static_cast<std::size_t>(i) * n + i] = 1.0;

  const double tol = opts.tol_factor * frobenius_norm(x);

  for (int sweep = 0;; ++sweep) {
    double off_max = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q)
        off_max = std::max(off_max, std::abs(a[static_cast<std::size_t>(p) * n + q]));
    if (off_max <= tol) break;
    if (sweep >= opts.max_sweeps)
      throw NoConvergenceError("Jacobi eigensolver did not converge within " +
                               std::to_string(opts.max_sweeps) + " sweeps");

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[static_cast<std::size_t>(p) * n + q];
        if (std::abs(apq) <= tol) continue;

        const double app = a[static_cast<std::size_t>(p) * n + p];
        const double aqq = a[static_cast<std::size_t>(q) * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        // tan of the rotation angle; safe form avoids overflow of theta^2.
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        double* rowp = &a[static_cast<std::size_t>(p) * n];
        double* rowq = &a[static_cast<std::size_t>(q) * n];
        for (int r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = rowp[r];
          const double arq = rowq[r];
          const double nrp = c * arp - s * arq;
          const double nrq = s * arp + c * arq;
          rowp[r] = nrp;
          rowq[r] = nrq;
          a[static_cast<std::size_t>(r) * n + p] = nrp;
          a[static_cast<std::size_t>(r) * n + q] = nrq;
        }
        rowp[p] = app - t * apq;
        rowq[q] = aqq + t * apq;
        rowp[q] = 0.0;
        rowq[p] = 0.0;

        double* vp = &vt[static_cast<std::size_t>(p) * n];
        double* vq = &vt[static_cast<std::size_t>(q) * n];
        for (int r = 0; r < n; ++r) {
          const double urp = vp[r];
          const double urq = vq[r];
          vp[r] = c * urp - s * urq;
          vq[r] = s * urp + c * urq;
        }
      }
    }
  }

  // Sort eigenpairs by descending eigenvalue; stable, so ties keep the
  // order the sweep produced (deterministic runs).
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
    return a[static_cast<std::size_t>(i) * n + i] > a[static_cast<std::size_t>(j) * n + j];
  });

  SpectralDecomp out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = idx[j];
    out.eigenvalues[j] = a[static_cast<std::size_t>(src) * n + src];
    for (int i = 0; i < n; ++i)
      out.eigenvectors(i, j) = vt[static_cast<std::size_t>(src) * n + i];
  }
  return out;
}

// U diag(s) U^T, built on the upper triangle and mirrored so the result is
// exactly symmetric.
inline SymMatrix reconstruct(const SpectralDecomp& decomp) {
  const int n = static_cast<int>(decomp.eigenvalues.size());
  SymMatrix out(n);
  std::vector<double> col(n);
  for (int k = 0; k < n; ++k) {
    const double s = decomp.eigenvalues[k];
    if (s == 0.0) continue;
    for (int i = 0; i < n; ++i) col[i] = decomp.eigenvectors(i, k);
    for (int i = 0; i < n; ++i) {
      const double si = s * col[i];
      for (int j = i; j < n; ++j) out.set(i, j, out(i, j) + si * col[j]);
    }
  }
  return out;
}

}  // namespace lrd
