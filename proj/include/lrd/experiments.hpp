#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lrd/datagen.hpp"
#include "lrd/errors.hpp"
#include "lrd/matrix_io.hpp"
#include "lrd/metrics.hpp"
#include "lrd/rng.hpp"
#include "lrd/solver.hpp"

namespace lrd {

// Objective trace check used on every recorded run: non-increasing within
// an absolute slack of slack_factor * trace[0].
inline bool trace_is_monotone(const std::vector<double>& trace, double slack_factor = 1e-12) {
  if (trace.empty()) return true;
  const double slack = slack_factor * trace.front();
  for (std::size_t h = 1; h < trace.size(); ++h)
    if (trace[h] > trace[h - 1] + slack) return false;
  return true;
}

struct RunRecord {
  int run_index = 0;
  std::uint64_t seed = 0;  // per-run master seed; generation/sampling streams derive from it
  int n = 0;
  int r = 0;
  int sample_size = 0;  // 0 when the solver saw the exact sigma
  int iterations = 0;
  bool converged = false;
  bool trace_monotone = true;
  double wall_seconds = 0.0;  // solve() only, generation and I/O excluded
  double relative_residual = 0.0;
  double rel_decomp_error = 0.0;
  double rel_error_l = 0.0;
  double rel_error_d = 0.0;
  std::optional<double> sanity_gap;
  std::optional<double> explained_variance_value;
};

// Per-(n, r, N) statistics; time columns mirror the scaling tables.
struct CellAggregate {
  int n = 0;
  int r = 0;
  int sample_size = 0;
  int count = 0;
  int converged_count = 0;
  double time_mean = 0.0;
  double time_std = 0.0;  // sample standard deviation
  double iterations_mean = 0.0;
  double rel_decomp_error_mean = 0.0;
  double rel_decomp_error_max = 0.0;
  double rel_error_l_max = 0.0;
  double rel_error_d_max = 0.0;
  std::optional<double> sanity_gap_max;
};

struct ExperimentReport {
  std::string kind;
  std::uint64_t root_seed = 0;
  double epsilon = 0.0;
  int max_iter = 0;
  std::string init_name;
  std::vector<RunRecord> records;
  std::vector<CellAggregate> aggregates;
};

inline std::string init_policy_name(const InitPolicy& init) {
  switch (init.kind) {
    case InitPolicy::Kind::DiagonalOfSigma: return "diag";
    case InitPolicy::Kind::RandomUniform: return "random";
    case InitPolicy::Kind::Zero: return "zero";
    case InitPolicy::Kind::Explicit: return "explicit";
  }
  return "unknown";
}

// Recomputes per-cell aggregates from the records; the reports store exactly
// this function's output, so consumers can re-derive and cross-check.
inline std::vector<CellAggregate> aggregate_records(const std::vector<RunRecord>& records) {
  std::vector<CellAggregate> cells;
  auto find_cell = [&](const RunRecord& rec) -> CellAggregate& {
    for (auto& cell : cells)
      if (cell.n == rec.n && cell.r == rec.r && cell.sample_size == rec.sample_size) return cell;
    CellAggregate cell;
    cell.n = rec.n;
    cell.r = rec.r;
    cell.sample_size = rec.sample_size;
    cells.push_back(cell);
    return cells.back();
  };

  for (const auto& rec : records) {
    CellAggregate& cell = find_cell(rec);
    ++cell.count;
    if (rec.converged) ++cell.converged_count;
    cell.time_mean += rec.wall_seconds;
    cell.iterations_mean += rec.iterations;
    cell.rel_decomp_error_mean += rec.rel_decomp_error;
    cell.rel_decomp_error_max = std::max(cell.rel_decomp_error_max, rec.rel_decomp_error);
    cell.rel_error_l_max = std::max(cell.rel_error_l_max, rec.rel_error_l);
    cell.rel_error_d_max = std::max(cell.rel_error_d_max, rec.rel_error_d);
    if (rec.sanity_gap) {
      if (!cell.sanity_gap_max || *rec.sanity_gap > *cell.sanity_gap_max)
        cell.sanity_gap_max = *rec.sanity_gap;
    }
  }
  for (auto& cell : cells) {
    cell.time_mean /= cell.count;
    cell.iterations_mean /= cell.count;
    cell.rel_decomp_error_mean /= cell.count;
  }
  // Second pass for the time standard deviation.
  for (auto& cell : cells) {
    if (cell.count < 2) continue;
    double acc = 0.0;
    for (const auto& rec : records) {
      if (rec.n != cell.n || rec.r != cell.r || rec.sample_size != cell.sample_size) continue;
      const double dev = rec.wall_seconds - cell.time_mean;
      acc += dev * dev;
    }
    cell.time_std = std::sqrt(acc / (cell.count - 1));
  }
  return cells;
}

// Runs fn(0..count-1) on up to `jobs` threads. Records land in preallocated
// slots, so results are identical regardless of the thread count.
template <typename Fn>
void parallel_for_index(int count, int jobs, Fn&& fn) {
  jobs = std::min(std::max(jobs, 1), count > 0 ? count : 1);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

struct RunSpec {
  int n = 0;
  int r = 0;
  int sample_size = 0;
  bool with_explained_variance = false;
};

inline RunRecord execute_run(const RunSpec& spec, std::uint64_t root_seed, int run_index,
                             SolverConfig config) {
  const std::uint64_t master = child_seed(root_seed, static_cast<std::uint64_t>(run_index));
  const GroundTruth truth = generate_factor_model(spec.n, spec.r, child_seed(master, 0));

  std::optional<SampleCovariance> sample;
  const SymMatrix* input = &truth.sigma;
  if (spec.sample_size > 0) {
    sample = sample_covariance(truth.sigma, spec.sample_size, child_seed(master, 1));
    input = &sample->sigma_hat;
  }
  if (config.init.kind == InitPolicy::Kind::RandomUniform)
    config.init.seed = child_seed(master, 2);

  const auto t0 = std::chrono::steady_clock::now();
  const SolverResult result = solve(*input, RankBudget{spec.r}, config);
  const auto t1 = std::chrono::steady_clock::now();

  const RecoveryReport recovery =
      recovery_report(truth, result, sample ? &*sample : nullptr);

  RunRecord rec;
  rec.run_index = run_index;
  rec.seed = master;
  rec.n = spec.n;
  rec.r = spec.r;
  rec.sample_size = spec.sample_size;
  rec.iterations = result.iterations;
  rec.converged = result.converged;
  rec.trace_monotone = trace_is_monotone(result.objective_trace);
  rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  rec.relative_residual = result.relative_residual;
  rec.rel_decomp_error = recovery.rel_decomp_error;
  rec.rel_error_l = recovery.rel_error_l;
  rec.rel_error_d = recovery.rel_error_d;
  rec.sanity_gap = recovery.sanity_gap;
  if (spec.with_explained_variance) {
    try {
      rec.explained_variance_value = explained_variance(result, *input, RankBudget{spec.r});
    } catch (const ZeroDenominatorError&) {
      rec.explained_variance_value = std::nullopt;
    }
  }
  return rec;
}

inline ExperimentReport run_cells(std::string kind, const std::vector<RunSpec>& cells,
                                  int runs_per_cell, std::uint64_t root_seed,
                                  const SolverConfig& config, int jobs) {
  ExperimentReport report;
  report.kind = std::move(kind);
  report.root_seed = root_seed;
  report.epsilon = config.epsilon;
  report.max_iter = config.max_iter;
  report.init_name = init_policy_name(config.init);

  const int total = static_cast<int>(cells.size()) * runs_per_cell;
  report.records.resize(total);
  parallel_for_index(total, jobs, [&](int index) {
    const RunSpec& spec = cells[index / runs_per_cell];
    report.records[index] = execute_run(spec, root_seed, index, config);
  });
  report.aggregates = aggregate_records(report.records);
  return report;
}

}  // namespace detail

struct ExactRecoveryParams {
  int n = 40;
  int r = 4;
  int runs = 200;
  std::uint64_t root_seed = 1;
  SolverConfig solver{};
  int jobs = 1;
};

inline ExperimentReport run_exact_recovery(const ExactRecoveryParams& params) {
  if (params.runs < 1) throw InvalidDimsError("runs must be at least 1");
  detail::RunSpec spec{params.n, params.r, 0, false};
  return detail::run_cells("exact-recovery", {spec}, params.runs, params.root_seed, params.solver,
                           params.jobs);
}

struct ScalingParams {
  enum class Profile { FixedRank, FixedRatio };
  Profile profile = Profile::FixedRank;
  int runs = 50;
  int max_n = 1280;  // cells n = 20,40,...,1280 are cut off above this
  std::uint64_t root_seed = 1;
  SolverConfig solver{};
  int jobs = 1;
};

inline std::vector<std::pair<int, int>> scaling_cells(ScalingParams::Profile profile, int max_n) {
  std::vector<std::pair<int, int>> cells;
  for (int n = 20; n <= max_n && n <= 1280; n *= 2)
    cells.emplace_back(n, profile == ScalingParams::Profile::FixedRank ? 8 : n / 5);
  return cells;
}

inline ExperimentReport run_scaling(const ScalingParams& params) {
  if (params.runs < 1) throw InvalidDimsError("runs must be at least 1");
  std::vector<detail::RunSpec> specs;
  for (auto [n, r] : scaling_cells(params.profile, params.max_n))
    specs.push_back({n, r, 0, false});
  if (specs.empty()) throw InvalidDimsError("max_n below the smallest scaling cell (20)");
  const char* kind = params.profile == ScalingParams::Profile::FixedRank ? "scaling-fixed-rank"
                                                                         : "scaling-fixed-ratio";
  return detail::run_cells(kind, specs, params.runs, params.root_seed, params.solver, params.jobs);
}

struct SampledParams {
  int n = 40;
  int r = 4;
  std::vector<int> sample_sizes{200, 500, 1000};
  int runs = 200;
  std::uint64_t root_seed = 1;
  SolverConfig solver{};
  int jobs = 1;
};

inline ExperimentReport run_sampled(const SampledParams& params) {
  if (params.runs < 1) throw InvalidDimsError("runs must be at least 1");
  if (params.sample_sizes.empty()) throw InvalidDimsError("need at least one sample size");
  std::vector<detail::RunSpec> specs;
  for (int n_samples : params.sample_sizes) {
    if (n_samples < 2) throw TooFewSamplesError("sample size must be at least 2");
    specs.push_back({params.n, params.r, n_samples, false});
  }
  return detail::run_cells("sampled-covariance", specs, params.runs, params.root_seed,
                           params.solver, params.jobs);
}

// One row per requested rank for a fixed input matrix.
struct EvSweepRow {
  int r = 0;
  std::optional<double> explained_variance_value;  // empty when degenerate
  int iterations = 0;
  bool converged = false;
  bool trace_monotone = true;
  double relative_residual = 0.0;
  double wall_seconds = 0.0;
};

struct EvSweepReport {
  std::string kind = "explained-variance";
  double epsilon = 0.0;
  int max_iter = 0;
  std::string init_name;
  std::vector<EvSweepRow> rows;
};

inline EvSweepReport run_explained_variance_sweep(const SymMatrix& sigma,
                                                  const std::vector<int>& ranks,
                                                  const SolverConfig& config = {}) {
  if (ranks.empty()) throw InvalidDimsError("need at least one rank value");
  EvSweepReport report;
  report.epsilon = config.epsilon;
  report.max_iter = config.max_iter;
  report.init_name = init_policy_name(config.init);
  for (int r : ranks) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolverResult result = solve(sigma, RankBudget{r}, config);
    const auto t1 = std::chrono::steady_clock::now();
    EvSweepRow row;
    row.r = r;
    row.iterations = result.iterations;
    row.converged = result.converged;
    row.trace_monotone = trace_is_monotone(result.objective_trace);
    row.relative_residual = result.relative_residual;
    row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    try {
      row.explained_variance_value = explained_variance(result, sigma, RankBudget{r});
    } catch (const ZeroDenominatorError&) {
      row.explained_variance_value = std::nullopt;  // degenerate: sigma == D*
    }
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization: JSON-lines records followed by one summary line, plus flat
// CSV mirrors of the records and the aggregates.

namespace detail {

inline nlohmann::json to_json(const RunRecord& rec) {
  nlohmann::json j{{"type", "run"},
                   {"run_index", rec.run_index},
                   {"seed", rec.seed},
                   {"n", rec.n},
                   {"r", rec.r},
                   {"sample_size", rec.sample_size},
                   {"iterations", rec.iterations},
                   {"converged", rec.converged},
                   {"trace_monotone", rec.trace_monotone},
                   {"wall_seconds", rec.wall_seconds},
                   {"relative_residual", rec.relative_residual},
                   {"rel_decomp_error", rec.rel_decomp_error},
                   {"rel_error_l", rec.rel_error_l},
                   {"rel_error_d", rec.rel_error_d}};
  j["sanity_gap"] = rec.sanity_gap ? nlohmann::json(*rec.sanity_gap) : nlohmann::json();
  j["explained_variance"] = rec.explained_variance_value
                                ? nlohmann::json(*rec.explained_variance_value)
                                : nlohmann::json();
  return j;
}

inline nlohmann::json to_json(const CellAggregate& cell) {
  nlohmann::json j{{"n", cell.n},
                   {"r", cell.r},
                   {"sample_size", cell.sample_size},
                   {"count", cell.count},
                   {"converged_count", cell.converged_count},
                   {"time_mean", cell.time_mean},
                   {"time_std", cell.time_std},
                   {"iterations_mean", cell.iterations_mean},
                   {"rel_decomp_error_mean", cell.rel_decomp_error_mean},
                   {"rel_decomp_error_max", cell.rel_decomp_error_max},
                   {"rel_error_l_max", cell.rel_error_l_max},
                   {"rel_error_d_max", cell.rel_error_d_max}};
  j["sanity_gap_max"] = cell.sanity_gap_max ? nlohmann::json(*cell.sanity_gap_max)
                                            : nlohmann::json();
  return j;
}

inline std::string csv_opt(const std::optional<double>& v) {
  return v ? format_value(*v) : std::string();
}

}  // namespace detail

inline void write_report_jsonl(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  for (const auto& rec : report.records) out << detail::to_json(rec).dump() << '\n';
  nlohmann::json summary{{"type", "summary"},
                         {"kind", report.kind},
                         {"root_seed", report.root_seed},
                         {"epsilon", report.epsilon},
                         {"max_iter", report.max_iter},
                         {"init", report.init_name},
                         {"runs", report.records.size()}};
  summary["aggregates"] = nlohmann::json::array();
  for (const auto& cell : report.aggregates) summary["aggregates"].push_back(detail::to_json(cell));
  out << summary.dump() << '\n';
}

inline void write_report_csv(const ExperimentReport& report, const std::string& records_path,
                             const std::string& aggregates_path) {
  {
    std::ofstream out(records_path);
    if (!out) throw ParseError("cannot write '" + records_path + "'");
    out << "run_index,seed,n,r,sample_size,iterations,converged,trace_monotone,wall_seconds,"
           "relative_residual,rel_decomp_error,rel_error_l,rel_error_d,sanity_gap,"
           "explained_variance\n";
    for (const auto& rec : report.records) {
      out << rec.run_index << ',' << rec.seed << ',' << rec.n << ',' << rec.r << ','
          << rec.sample_size << ',' << rec.iterations << ',' << (rec.converged ? 1 : 0) << ','
          << (rec.trace_monotone ? 1 : 0) << ',' << detail::format_value(rec.wall_seconds) << ','
          << detail::format_value(rec.relative_residual) << ','
          << detail::format_value(rec.rel_decomp_error) << ','
          << detail::format_value(rec.rel_error_l) << ','
          << detail::format_value(rec.rel_error_d) << ',' << detail::csv_opt(rec.sanity_gap) << ','
          << detail::csv_opt(rec.explained_variance_value) << '\n';
    }
  }
  std::ofstream out(aggregates_path);
  if (!out) throw ParseError("cannot write '" + aggregates_path + "'");
  out << "n,r,sample_size,count,converged_count,time_mean,time_std,iterations_mean,"
         "rel_decomp_error_mean,rel_decomp_error_max,rel_error_l_max,rel_error_d_max,"
         "sanity_gap_max\n";
  for (const auto& cell : report.aggregates) {
    out << cell.n << ',' << cell.r << ',' << cell.sample_size << ',' << cell.count << ','
        << cell.converged_count << ',' << detail::format_value(cell.time_mean) << ','
        << detail::format_value(cell.time_std) << ','
        << detail::format_value(cell.iterations_mean) << ','
        << detail::format_value(cell.rel_decomp_error_mean) << ','
        << detail::format_value(cell.rel_decomp_error_max) << ','
        << detail::format_value(cell.rel_error_l_max) << ','
        << detail::format_value(cell.rel_error_d_max) << ','
        << detail::csv_opt(cell.sanity_gap_max) << '\n';
  }
}

inline void write_report_jsonl(const EvSweepReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  for (const auto& row : report.rows) {
    nlohmann::json j{{"type", "run"},
                     {"r", row.r},
                     {"iterations", row.iterations},
                     {"converged", row.converged},
                     {"trace_monotone", row.trace_monotone},
                     {"relative_residual", row.relative_residual},
                     {"wall_seconds", row.wall_seconds},
                     {"degenerate", !row.explained_variance_value.has_value()}};
    j["explained_variance"] = row.explained_variance_value
                                  ? nlohmann::json(*row.explained_variance_value)
                                  : nlohmann::json();
    out << j.dump() << '\n';
  }
  nlohmann::json summary{{"type", "summary"},
                         {"kind", report.kind},
                         {"epsilon", report.epsilon},
                         {"max_iter", report.max_iter},
                         {"init", report.init_name},
                         {"rows", report.rows.size()}};
  out << summary.dump() << '\n';
}

inline void write_report_csv(const EvSweepReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "r,explained_variance,degenerate,iterations,converged,trace_monotone,"
         "relative_residual,wall_seconds\n";
  for (const auto& row : report.rows) {
    out << row.r << ',' << detail::csv_opt(row.explained_variance_value) << ','
        << (row.explained_variance_value ? 0 : 1) << ',' << row.iterations << ','
        << (row.converged ? 1 : 0) << ',' << (row.trace_monotone ? 1 : 0) << ','
        << detail::format_value(row.relative_residual) << ','
        << detail::format_value(row.wall_seconds) << '\n';
  }
}

}  // namespace lrd
