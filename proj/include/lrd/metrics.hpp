#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "lrd/datagen.hpp"
#include "lrd/errors.hpp"
#include "lrd/solver.hpp"
#include "lrd/spectral.hpp"
#include "lrd/sym_matrix.hpp"

namespace lrd {

// Recovery diagnostics against a known ground truth. All norms Frobenius.
struct RecoveryReport {
  // ||sigma - L* - D*|| / ||sigma||; sigma is the matrix the solver saw
  // (the sample covariance when one was supplied).
  double rel_decomp_error = 0.0;
  double rel_error_l = 0.0;  // ||L_true - L*|| / ||L_true||
  double rel_error_d = 0.0;  // ||D_true - D*|| / ||D_true||
  // ||L* + D* - sigma_hat|| - ||sigma_true - sigma_hat||; nonpositive means
  // the fit beats the generating truth as an approximation of the sample.
  std::optional<double> sanity_gap;
};

inline RecoveryReport recovery_report(const GroundTruth& truth, const SolverResult& result,
                                      const SampleCovariance* sample = nullptr) {
  const int n = truth.sigma.order();
  if (result.l_star.order() != n || result.d_star.order() != n)
    throw DimensionMismatchError("solver result order does not match ground truth");
  if (sample && sample->sigma_hat.order() != n)
    throw DimensionMismatchError("sample covariance order does not match ground truth");

  const SymMatrix& sigma_seen = sample ? sample->sigma_hat : truth.sigma;
  const double sigma_norm = frobenius_norm(sigma_seen);
  const double l_norm = frobenius_norm(truth.l_true);
  const double d_norm = frobenius_norm(truth.d_true);
  if (sigma_norm == 0.0 || l_norm == 0.0 || d_norm == 0.0)
    throw ZeroDenominatorError("zero norm in a relative-error denominator");

  RecoveryReport report;
  report.rel_decomp_error =
      std::sqrt(objective(sigma_seen, result.l_star, result.d_star)) / sigma_norm;
  report.rel_error_l = frobenius_norm(truth.l_true - result.l_star) / l_norm;

  double d_err_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double diff = truth.d_true[i] - result.d_star[i];
    d_err_sq += diff * diff;
  }
  report.rel_error_d = std::sqrt(d_err_sq) / d_norm;

  if (sample) {
    const double fit = std::sqrt(objective(sample->sigma_hat, result.l_star, result.d_star));
    const double truth_fit =
        frobenius_norm(truth.sigma - sample->sigma_hat);
    report.sanity_gap = fit - truth_fit;
  }
  return report;
}

// Share of variance captured by the low-rank part: sum of the r largest
// eigenvalues of L* over the total absolute eigenvalue mass of sigma - D*.
inline double explained_variance(const SolverResult& result, const SymMatrix& sigma,
                                 RankBudget rank) {
  const int n = sigma.order();
  if (result.l_star.order() != n || result.d_star.order() != n)
    throw DimensionMismatchError("solver result order does not match sigma");
  check_rank(rank, n);

  const SpectralDecomp eig_l = spectral_decompose(result.l_star);
  double numerator = 0.0;
  for (int i = 0; i < rank.r; ++i) numerator += eig_l.eigenvalues[i];

  const SpectralDecomp eig_s = spectral_decompose(sigma - result.d_star);
  double denominator = 0.0;
  for (double v : eig_s.eigenvalues) denominator += std::abs(v);

  if (denominator == 0.0)
    throw ZeroDenominatorError("sigma - D* has no eigenvalue mass; explained variance undefined");
  return numerator / denominator;
}

}  // namespace lrd
