#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lrd/errors.hpp"
#include "lrd/projections.hpp"
#include "lrd/rng.hpp"
#include "lrd/spectral.hpp"
#include "lrd/sym_matrix.hpp"

namespace lrd {

// How the diagonal iterate D_0 is chosen.
struct InitPolicy {
  enum class Kind { DiagonalOfSigma, RandomUniform, Zero, Explicit };

  Kind kind = Kind::DiagonalOfSigma;
  std::uint64_t seed = 0;
  std::optional<DiagMatrix> explicit_diag;

  static InitPolicy diagonal_of_sigma() { return {}; }
  static InitPolicy random_uniform(std::uint64_t seed) {
    InitPolicy p;
    p.kind = Kind::RandomUniform;
    p.seed = seed;
    return p;
  }
  static InitPolicy zero() {
    InitPolicy p;
    p.kind = Kind::Zero;
    return p;
  }
  static InitPolicy explicit_diag_of(DiagMatrix d) {
    InitPolicy p;
    p.kind = Kind::Explicit;
    p.explicit_diag = std::move(d);
    return p;
  }
};

struct SolverConfig {
  // Relative-residual stopping threshold: stop once
  // ||sigma - L - D||_F / ||sigma||_F <= epsilon.
  double epsilon = 1e-6;
  int max_iter = 5000;
  InitPolicy init{};
};

struct SolverResult {
  SymMatrix l_star;
  DiagMatrix d_star;
  int rank = 0;        // budget the solve ran with
  int iterations = 0;  // completed L-then-D sweeps
  // Squared residual norms at every half step. Index 0 is the initial
  // objective with L = 0; index 2k-1 follows the k-th L update, index 2k the
  // k-th D update. Non-increasing up to roundoff.
  std::vector<double> objective_trace;
  bool converged = false;
  double relative_residual = 0.0;
};

// Called after each completed sweep with the current iterates; used by the
// trace-equivalence and feasibility tests.
using SweepObserver = std::function<void(int iteration, const SymMatrix& l, const DiagMatrix& d)>;

// Squared Frobenius norm of sigma - L - D.
inline double objective(const SymMatrix& sigma, const SymMatrix& l, const DiagMatrix& d) {
  const int n = sigma.order();
  if (l.order() != n || d.order() != n)
    throw DimensionMismatchError("objective operands have mismatched orders");
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double rij = sigma(i, j) - l(i, j);
      if (i == j) rij -= d[i];
      sum += rij * rij;
    }
  }
  return sum;
}

namespace detail {

inline DiagMatrix initial_diagonal(const SymMatrix& sigma, const InitPolicy& init) {
  const int n = sigma.order();
  switch (init.kind) {
    case InitPolicy::Kind::Zero:
      return DiagMatrix(n);
    case InitPolicy::Kind::DiagonalOfSigma: {
      // Clamped at zero so D_0 is always a feasible member of the target set.
      DiagMatrix d(n);
      for (int i = 0; i < n; ++i) d[i] = sigma(i, i) > 0.0 ? sigma(i, i) : 0.0;
      return d;
    }
    case InitPolicy::Kind::RandomUniform: {
      double hi = 0.0;
      for (int i = 0; i < n; ++i) hi = std::max(hi, sigma(i, i));
      Xoshiro256pp rng(init.seed);
      DiagMatrix d(n);
      for (int i = 0; i < n; ++i) d[i] = rng.uniform(0.0, hi);
      return d;
    }
    case InitPolicy::Kind::Explicit: {
      if (!init.explicit_diag) throw std::invalid_argument("explicit init without a diagonal");
      const DiagMatrix& d = *init.explicit_diag;
      if (d.order() != n) throw DimensionMismatchError("explicit initial diagonal has wrong order");
      for (double v : d.diag())
        if (v < 0.0) throw std::invalid_argument("explicit initial diagonal must be nonnegative");
      return d;
    }
  }
  throw std::invalid_argument("unknown init policy");
}

inline void validate_config(const SolverConfig& config) {
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (config.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
}

inline SolverResult zero_sigma_result(int n, RankBudget rank) {
  SolverResult res;
  res.l_star = SymMatrix(n);
  res.d_star = DiagMatrix(n);
  res.rank = rank.r;
  res.objective_trace = {0.0};
  res.converged = true;  // by convention: the zero decomposition is exact
  return res;
}

}  // namespace detail

// Alternating minimization: L_k is the nearest PSD matrix of rank <= r to
// sigma - D_{k-1}, D_k the nearest nonnegative diagonal to sigma - L_k.
// Runs while the relative residual exceeds epsilon and k < max_iter.
inline SolverResult solve(const SymMatrix& sigma, RankBudget rank, const SolverConfig& config = {},
                          const SweepObserver& observer = {}) {
  const int n = sigma.order();
  check_rank(rank, n);
  detail::validate_config(config);

  const double sigma_norm = frobenius_norm(sigma);
  if (sigma_norm == 0.0) return detail::zero_sigma_result(n, rank);

  DiagMatrix d = detail::initial_diagonal(sigma, config.init);
  SymMatrix l(n);

  SolverResult res;
  res.rank = rank.r;
  res.objective_trace.reserve(2 * static_cast<std::size_t>(config.max_iter) + 1);

  double obj = objective(sigma, l, d);
  res.objective_trace.push_back(obj);
  double rel = std::sqrt(obj) / sigma_norm;

  int k = 0;
  while (rel > config.epsilon && k < config.max_iter) {
    ++k;
    l = project_low_rank_psd(sigma - d, rank);
    res.objective_trace.push_back(objective(sigma, l, d));
    d = project_diag_psd(sigma - l);
    obj = objective(sigma, l, d);
    res.objective_trace.push_back(obj);
    rel = std::sqrt(obj) / sigma_norm;
    if (observer) observer(k, l, d);
  }

  res.l_star = std::move(l);
  res.d_star = std::move(d);
  res.iterations = k;
  res.converged = rel <= config.epsilon;
  res.relative_residual = rel;
  return res;
}

// Same fixed point reached as an alternating projection between the rank
// constraint set and the translated diagonal set: L_{k+1} is the low-rank
// projection of the translated-diagonal projection of L_k, and D_k is
// recovered as the diagonal of sigma minus that intermediate.
inline SolverResult solve_via_alternating_projections(const SymMatrix& sigma, RankBudget rank,
                                                      const SolverConfig& config = {},
                                                      const SweepObserver& observer = {}) {
  const int n = sigma.order();
  check_rank(rank, n);
  detail::validate_config(config);

  const double sigma_norm = frobenius_norm(sigma);
  if (sigma_norm == 0.0) return detail::zero_sigma_result(n, rank);

  DiagMatrix d = detail::initial_diagonal(sigma, config.init);
  SymMatrix l(n);

  SolverResult res;
  res.rank = rank.r;
  res.objective_trace.reserve(2 * static_cast<std::size_t>(config.max_iter) + 1);

  double obj = objective(sigma, l, d);
  res.objective_trace.push_back(obj);
  double rel = std::sqrt(obj) / sigma_norm;

  // The first L step starts from D_0 directly; afterwards the translated
  // projection of the previous L supplies sigma - D_{k-1}.
  SymMatrix translated = sigma - d;
  int k = 0;
  while (rel > config.epsilon && k < config.max_iter) {
    ++k;
    l = project_low_rank_psd(translated, rank);
    res.objective_trace.push_back(objective(sigma, l, d));
    translated = project_translated_diag(l, sigma);
    for (int i = 0; i < n; ++i) d[i] = sigma(i, i) - translated(i, i);
    obj = objective(sigma, l, d);
    res.objective_trace.push_back(obj);
    rel = std::sqrt(obj) / sigma_norm;
    if (observer) observer(k, l, d);
  }

  res.l_star = std::move(l);
  res.d_star = std::move(d);
  res.iterations = k;
  res.converged = rel <= config.epsilon;
  res.relative_residual = rel;
  return res;
}

struct StationarityOptions {
  int probes = 100;
  double magnitude = 1e-4;
  double fixed_point_tol = 1e-8;
  double improvement_tol = 1e-12;
  std::uint64_t seed = 0x7452f9da91c156b3ULL;
};

// Empirical stationarity diagnostics for a finished solve.
struct StationarityReport {
  bool l_is_fixed_point = false;
  bool d_is_fixed_point = false;
  bool perturbations_pass = false;
  double l_gap = 0.0;             // ||P_L(sigma - D*) - L*||_F
  double d_gap = 0.0;             // ||P_D(sigma - L*) - D*||_F
  double best_improvement = 0.0;  // largest objective drop over all probes
  int probes = 0;

  bool all_pass() const { return l_is_fixed_point && d_is_fixed_point && perturbations_pass; }
};

// Checks that (L*, D*) is a fixed point of both projection steps and that no
// random feasible perturbation of the stated magnitude improves the
// objective beyond roundoff. These are necessary conditions for a local
// minimum, not a certificate.
inline StationarityReport stationarity_report(const SymMatrix& sigma, const SolverResult& result,
                                              const StationarityOptions& opts = {}) {
  const int n = sigma.order();
  if (result.l_star.order() != n || result.d_star.order() != n)
    throw DimensionMismatchError("result does not match sigma's order");
  const RankBudget rank{result.rank};

  StationarityReport report;
  report.probes = opts.probes;

  const SymMatrix l_refit = project_low_rank_psd(sigma - result.d_star, rank);
  report.l_gap = frobenius_norm(l_refit - result.l_star);
  report.l_is_fixed_point =
      report.l_gap <= opts.fixed_point_tol * std::max(1.0, frobenius_norm(result.l_star));

  const DiagMatrix d_refit = project_diag_psd(sigma - result.l_star);
  double d_gap_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double diff = d_refit[i] - result.d_star[i];
    d_gap_sq += diff * diff;
  }
  report.d_gap = std::sqrt(d_gap_sq);
  report.d_is_fixed_point =
      report.d_gap <= opts.fixed_point_tol * std::max(1.0, frobenius_norm(result.d_star));

  const double base = objective(sigma, result.l_star, result.d_star);
  Xoshiro256pp rng(opts.seed);
  double best_improvement = 0.0;
  for (int probe = 0; probe < opts.probes; ++probe) {
    // Symmetric direction of the requested magnitude, kept feasible by
    // re-projecting onto the rank constraint set.
    SymMatrix delta(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) delta.set(i, j, rng.gaussian());
    const double dnorm = frobenius_norm(delta);
    if (dnorm > 0.0) delta *= opts.magnitude / dnorm;
    const SymMatrix l_probe = project_low_rank_psd(result.l_star + delta, rank);

    DiagMatrix d_probe(n);
    double gnorm = 0.0;
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
      g[i] = rng.gaussian();
      gnorm += g[i] * g[i];
    }
    gnorm = std::sqrt(gnorm);
    const double scale = gnorm > 0.0 ? opts.magnitude / gnorm : 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = result.d_star[i] + scale * g[i];
      d_probe[i] = v > 0.0 ? v : 0.0;
    }

    best_improvement = std::max(best_improvement, base - objective(sigma, l_probe, d_probe));
  }
  report.best_improvement = best_improvement;
  report.perturbations_pass = best_improvement <= opts.improvement_tol;
  return report;
}

}  // namespace lrd
