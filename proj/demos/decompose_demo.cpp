// Minimal library walkthrough: build a synthetic factor-model covariance,
// decompose it, and print the recovery errors.

#include <cstdio>

#include "lrd/lrd.hpp"

int main() {
  const int n = 12;
  const int r = 3;
  const lrd::GroundTruth truth = lrd::generate_factor_model(n, r, /*seed=*/7);

  lrd::SolverConfig config;
  config.epsilon = 1e-10;
  const lrd::SolverResult result = lrd::solve(truth.sigma, lrd::RankBudget{r}, config);

  const lrd::RecoveryReport report = lrd::recovery_report(truth, result);
  std::printf("n=%d r=%d iterations=%d converged=%d\n", n, r, result.iterations,
              result.converged ? 1 : 0);
  std::printf("relative residual     %.3e\n", result.relative_residual);
  std::printf("rel. error on L       %.3e\n", report.rel_error_l);
  std::printf("rel. error on D       %.3e\n", report.rel_error_d);
  std::printf("explained variance    %.6f\n",
              lrd::explained_variance(result, truth.sigma, lrd::RankBudget{r}));
  return 0;
}
