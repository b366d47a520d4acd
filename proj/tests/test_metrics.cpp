#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lrd/datagen.hpp"
#include "lrd/metrics.hpp"
#include "lrd/solver.hpp"
#include "oracles.hpp"

using lrd::DiagMatrix;
using lrd::GroundTruth;
using lrd::RankBudget;
using lrd::RecoveryReport;
using lrd::SampleCovariance;
using lrd::SolverResult;
using lrd::SymMatrix;

namespace {

// Integer loadings with half-integer diagonal: all sums are exact in binary,
// so error metrics on the exact copy must vanish identically.
GroundTruth exact_truth() {
  GroundTruth truth;
  truth.n = 3;
  truth.r = 2;
  truth.seed = 0;
  const double a[3][2] = {{1, 0}, {2, 1}, {0, 3}};
  truth.l_true = SymMatrix(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      truth.l_true.set(i, j, a[i][0] * a[j][0] + a[i][1] * a[j][1]);
  truth.d_true = DiagMatrix(3);
  truth.d_true[0] = 0.5;
  truth.d_true[1] = 1.5;
  truth.d_true[2] = 1.0;
  truth.sigma = truth.l_true + truth.d_true;
  return truth;
}

SolverResult result_from(const GroundTruth& truth) {
  SolverResult res;
  res.l_star = truth.l_true;
  res.d_star = truth.d_true;
  res.rank = truth.r;
  res.converged = true;
  res.objective_trace = {0.0};
  return res;
}

}  // namespace

TEST_CASE("exact copy yields zero errors") {
  const GroundTruth truth = exact_truth();
  const SolverResult res = result_from(truth);
  const RecoveryReport rep = lrd::recovery_report(truth, res);
  CHECK(rep.rel_decomp_error == 0.0);
  CHECK(rep.rel_error_l == 0.0);
  CHECK(rep.rel_error_d == 0.0);
  CHECK_FALSE(rep.sanity_gap.has_value());

  // With an integer-valued "sample" the gap cancels exactly as well.
  SampleCovariance sample;
  sample.sample_size = 10;
  sample.source_seed = 0;
  sample.sigma_hat = SymMatrix(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) sample.sigma_hat.set(i, j, i == j ? 4.0 : 1.0);
  const RecoveryReport with_sample = lrd::recovery_report(truth, res, &sample);
  REQUIRE(with_sample.sanity_gap.has_value());
  CHECK(*with_sample.sanity_gap == 0.0);
}

TEST_CASE("exact recovery run drives all errors below 1e-8") {
  const GroundTruth truth = lrd::generate_factor_model(40, 4, 2024);
  lrd::SolverConfig config;
  config.epsilon = 1e-10;
  const SolverResult res = lrd::solve(truth.sigma, RankBudget{4}, config);
  const RecoveryReport rep = lrd::recovery_report(truth, res);
  CHECK(rep.rel_decomp_error <= 1e-8);
  CHECK(rep.rel_error_l <= 1e-8);
  CHECK(rep.rel_error_d <= 1e-8);
}

TEST_CASE("sampled run satisfies the sanity inequality") {
  const GroundTruth truth = lrd::generate_factor_model(40, 4, 321);
  const SampleCovariance sample = lrd::sample_covariance(truth.sigma, 1000, 654);
  lrd::SolverConfig config;
  config.max_iter = 800;
  const SolverResult res = lrd::solve(sample.sigma_hat, RankBudget{4}, config);
  const RecoveryReport rep = lrd::recovery_report(truth, res, &sample);
  REQUIRE(rep.sanity_gap.has_value());
  CHECK(*rep.sanity_gap <= 0.0);
  // The decomposition error is measured against the sample the solver saw.
  CHECK(rep.rel_decomp_error ==
        Catch::Approx(std::sqrt(lrd::objective(sample.sigma_hat, res.l_star, res.d_star)) /
                      lrd::frobenius_norm(sample.sigma_hat)));
}

TEST_CASE("report rejects mismatched or degenerate inputs") {
  const GroundTruth truth = exact_truth();
  SolverResult res = result_from(truth);
  res.l_star = SymMatrix(4);
  CHECK_THROWS_AS(lrd::recovery_report(truth, res), lrd::DimensionMismatchError);

  GroundTruth degenerate = exact_truth();
  degenerate.l_true = SymMatrix(3);  // zero: denominator vanishes
  CHECK_THROWS_AS(lrd::recovery_report(degenerate, result_from(degenerate)),
                  lrd::ZeroDenominatorError);
}

TEST_CASE("explained variance is one for exact decompositions") {
  const GroundTruth truth = lrd::generate_factor_model(20, 3, 5150);
  lrd::SolverConfig config;
  config.epsilon = 1e-11;
  const SolverResult res = lrd::solve(truth.sigma, RankBudget{3}, config);
  REQUIRE(res.relative_residual <= 1e-10);
  CHECK(lrd::explained_variance(res, truth.sigma, RankBudget{3}) ==
        Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("explained variance is zero for a zero low-rank part") {
  SymMatrix eye(3);
  for (int i = 0; i < 3; ++i) eye.set(i, i, 1.0);
  SolverResult res;
  res.l_star = SymMatrix(3);
  res.d_star = DiagMatrix(3);  // sigma - D* = I, denominator 3
  res.rank = 1;
  CHECK(lrd::explained_variance(res, eye, RankBudget{1}) == 0.0);
}

TEST_CASE("explained variance degenerates when sigma equals D*") {
  SymMatrix eye(3);
  for (int i = 0; i < 3; ++i) eye.set(i, i, 1.0);
  SolverResult res;
  res.l_star = SymMatrix(3);
  res.d_star = DiagMatrix(3);
  for (int i = 0; i < 3; ++i) res.d_star[i] = 1.0;
  res.rank = 1;
  CHECK_THROWS_AS(lrd::explained_variance(res, eye, RankBudget{1}), lrd::ZeroDenominatorError);
}

TEST_CASE("explained variance is invariant under uniform positive scaling") {
  const GroundTruth truth = lrd::generate_factor_model(10, 2, 808);
  const SampleCovariance sample = lrd::sample_covariance(truth.sigma, 120, 17);
  lrd::SolverConfig config;
  config.max_iter = 400;
  const SolverResult res = lrd::solve(sample.sigma_hat, RankBudget{2}, config);
  const double base = lrd::explained_variance(res, sample.sigma_hat, RankBudget{2});

  const double c = 3.75;
  SolverResult scaled = res;
  scaled.l_star = res.l_star * c;
  for (int i = 0; i < 10; ++i) scaled.d_star[i] *= c;
  const double value = lrd::explained_variance(scaled, sample.sigma_hat * c, RankBudget{2});
  CHECK(value == Catch::Approx(base).epsilon(1e-12));
}

TEST_CASE("explained variance cross-checks against the charpoly oracle") {
  const GroundTruth truth = lrd::generate_factor_model(5, 2, 99);
  const SampleCovariance sample = lrd::sample_covariance(truth.sigma, 200, 41);
  lrd::SolverConfig config;
  config.max_iter = 400;
  const SolverResult res = lrd::solve(sample.sigma_hat, RankBudget{2}, config);
  const double value = lrd::explained_variance(res, sample.sigma_hat, RankBudget{2});
  CHECK(value > 0.0);
  CHECK(value <= 1.0 + 1e-12);

  // L* is PSD with rank <= 2, so its top-2 eigenvalue sum equals its trace;
  // the residual spectrum has distinct eigenvalues and suits the root oracle.
  double numerator = 0.0;
  for (int i = 0; i < 5; ++i) numerator += res.l_star(i, i);
  const auto residual_spectrum = oracle::charpoly_eigenvalues(sample.sigma_hat - res.d_star);
  double denominator = 0.0;
  for (double v : residual_spectrum) denominator += std::abs(v);
  CHECK(value == Catch::Approx(numerator / denominator).margin(1e-8));
}
