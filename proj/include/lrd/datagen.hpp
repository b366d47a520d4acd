#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lrd/dense_matrix.hpp"
#include "lrd/errors.hpp"
#include "lrd/rng.hpp"
#include "lrd/spectral.hpp"
#include "lrd/sym_matrix.hpp"

namespace lrd {

// Synthetic factor-model instance: sigma = l_true + d_true with l_true PSD
// of rank exactly r and d_true strictly positive diagonal.
struct GroundTruth {
  SymMatrix l_true;
  DiagMatrix d_true;
  SymMatrix sigma;
  int n = 0;
  int r = 0;
  std::uint64_t seed = 0;
};

struct SampleCovariance {
  SymMatrix sigma_hat;
  int sample_size = 0;
  std::uint64_t source_seed = 0;
};

namespace detail {

// A A^T for an n x r loading matrix, mirrored from the upper triangle.
inline SymMatrix gram_of_loadings(const Matrix& a) {
  const int n = a.rows();
  const int r = a.cols();
  SymMatrix out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double sum = 0.0;
      for (int k = 0; k < r; ++k) sum += a(i, k) * a(j, k);
      out.set(i, j, sum);
    }
  }
  return out;
}

inline double smallest_singular_value(const Matrix& a) {
  const int r = a.cols();
  SymMatrix gram(r);
  for (int i = 0; i < r; ++i) {
    for (int j = i; j < r; ++j) {
      double sum = 0.0;
      for (int k = 0; k < a.rows(); ++k) sum += a(k, i) * a(k, j);
      gram.set(i, j, sum);
    }
  }
  const SpectralDecomp eig = spectral_decompose(gram);
  const double lambda_min = eig.eigenvalues.back();
  return lambda_min > 0.0 ? std::sqrt(lambda_min) : 0.0;
}

}  // namespace detail

// Draws loadings with i.i.d. standard normal entries and a diagonal with
// entries uniform on [0.5, 1.5]. Deterministic per (n, r, seed); loadings
// are redrawn in the rare event of numerical rank deficiency.
inline GroundTruth generate_factor_model(int n, int r, std::uint64_t seed) {
  if (r < 1 || r >= n)
    throw InvalidDimsError("need 1 <= r < n, got n=" + std::to_string(n) +
                           " r=" + std::to_string(r));

  Xoshiro256pp rng(seed);
  Matrix a(n, r);
  for (int attempt = 0;; ++attempt) {
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < r; ++k) a(i, k) = rng.gaussian();
    if (detail::smallest_singular_value(a) > 1e-8) break;
    if (attempt >= 100)
      throw NumericalError("could not draw a full-rank loading matrix");
  }

  GroundTruth truth;
  truth.n = n;
  truth.r = r;
  truth.seed = seed;
  truth.l_true = detail::gram_of_loadings(a);
  truth.d_true = DiagMatrix(n);
  for (int i = 0; i < n; ++i) truth.d_true[i] = rng.uniform(0.5, 1.5);
  truth.sigma = truth.l_true + truth.d_true;
  return truth;
}

// Sample covariance of `sample_size` i.i.d. zero-mean Gaussian vectors with
// covariance sigma, drawn through the spectral square root. The estimator
// divides by N with no mean subtraction (the mean is known to be zero).
inline SampleCovariance sample_covariance(const SymMatrix& sigma, int sample_size,
                                          std::uint64_t seed) {
  const int n = sigma.order();
  if (sample_size < 2) throw TooFewSamplesError("sample size must be at least 2");

  const SpectralDecomp eig = spectral_decompose(sigma);
  const double norm = frobenius_norm(sigma);
  if (eig.eigenvalues.back() < -1e-9 * norm)
    throw NotPsdError("sigma has eigenvalue " + std::to_string(eig.eigenvalues.back()) +
                      ", not positive semidefinite");

  // Square root via eigenvalue clipping; strict zeros for the null space.
  Matrix root(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = eig.eigenvalues[k] > 0.0 ? std::sqrt(eig.eigenvalues[k]) : 0.0;
    for (int i = 0; i < n; ++i) root(i, k) = eig.eigenvectors(i, k) * s;
  }

  Xoshiro256pp rng(seed);
  std::vector<double> g(n), y(n);
  std::vector<double> accum(static_cast<std::size_t>(n) * n, 0.0);
  for (int draw = 0; draw < sample_size; ++draw) {
    for (int k = 0; k < n; ++k) g[k] = rng.gaussian();
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += root(i, k) * g[k];
      y[i] = sum;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) accum[static_cast<std::size_t>(i) * n + j] += y[i] * y[j];
  }

  SampleCovariance sample;
  sample.sample_size = sample_size;
  sample.source_seed = seed;
  sample.sigma_hat = SymMatrix(n);
  const double inv_n = 1.0 / sample_size;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      sample.sigma_hat.set(i, j, accum[static_cast<std::size_t>(i) * n + j] * inv_n);
  return sample;
}

}  // namespace lrd
