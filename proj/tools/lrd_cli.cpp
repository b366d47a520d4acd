// Command-line front end: single decompositions plus the Monte Carlo
// experiment suites, emitting JSON-lines and CSV reports.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrd/lrd.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  double epsilon = 1e-6;
  int max_iter = 5000;
  std::string init = "diag";
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir = ".";
  std::string format = "jsonl";
};

void add_solver_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--epsilon", opts.epsilon, "Relative-residual stopping threshold")
      ->capture_default_str();
  cmd->add_option("--max-iter", opts.max_iter, "Maximum number of sweeps")->capture_default_str();
  cmd->add_option("--init", opts.init, "Initial diagonal: diag, random, or zero")
      ->check(CLI::IsMember({"diag", "random", "zero"}))
      ->capture_default_str();
  cmd->add_option("--seed", opts.seed, "Root seed (also seeds --init random)")
      ->capture_default_str();
}

void add_report_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--jobs", opts.jobs, "Concurrent runs")->capture_default_str();
  cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--format", opts.format,
                  "Report format: jsonl (records + summary, with CSV mirrors) or csv only")
      ->check(CLI::IsMember({"jsonl", "csv"}))
      ->capture_default_str();
}

lrd::SolverConfig solver_config(const CommonOpts& opts) {
  lrd::SolverConfig config;
  config.epsilon = opts.epsilon;
  config.max_iter = opts.max_iter;
  if (opts.init == "diag")
    config.init = lrd::InitPolicy::diagonal_of_sigma();
  else if (opts.init == "random")
    config.init = lrd::InitPolicy::random_uniform(opts.seed);
  else
    config.init = lrd::InitPolicy::zero();
  return config;
}

fs::path ensure_out_dir(const CommonOpts& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_experiment_report(const lrd::ExperimentReport& report, const CommonOpts& opts,
                             const std::string& basename) {
  const fs::path dir = ensure_out_dir(opts);
  if (opts.format == "jsonl")
    lrd::write_report_jsonl(report, (dir / (basename + ".jsonl")).string());
  lrd::write_report_csv(report, (dir / (basename + "_records.csv")).string(),
                        (dir / (basename + "_aggregates.csv")).string());
}

void print_aggregates(const lrd::ExperimentReport& report) {
  for (const auto& cell : report.aggregates) {
    std::printf("n=%-5d r=%-4d N=%-5d runs=%-4d converged=%-4d time_mean=%.6gs time_std=%.6g "
                "iters_mean=%.6g err_decomp_max=%.6g err_l_max=%.6g err_d_max=%.6g",
                cell.n, cell.r, cell.sample_size, cell.count, cell.converged_count,
                cell.time_mean, cell.time_std, cell.iterations_mean, cell.rel_decomp_error_max,
                cell.rel_error_l_max, cell.rel_error_d_max);
    if (cell.sanity_gap_max) std::printf(" sanity_gap_max=%.6g", *cell.sanity_gap_max);
    std::printf("\n");
  }
}

int cmd_decompose(const std::string& input, int rank, const CommonOpts& opts) {
  const lrd::SymMatrix sigma = lrd::read_sym_matrix(input);
  const lrd::SolverConfig config = solver_config(opts);

  const auto t0 = std::chrono::steady_clock::now();
  const lrd::SolverResult result = lrd::solve(sigma, lrd::RankBudget{rank}, config);
  const auto t1 = std::chrono::steady_clock::now();
  const double seconds = std::chrono::duration<double>(t1 - t0).count();

  nlohmann::json ev;
  try {
    ev = lrd::explained_variance(result, sigma, lrd::RankBudget{rank});
  } catch (const lrd::ZeroDenominatorError&) {
    ev = nullptr;  // degenerate: sigma - D* has no eigenvalue mass
  }

  const fs::path dir = ensure_out_dir(opts);
  lrd::write_matrix_csv((dir / "l_star.csv").string(), result.l_star);
  lrd::write_matrix_csv((dir / "d_star.csv").string(), result.d_star);

  nlohmann::json summary{{"input", input},
                         {"n", sigma.order()},
                         {"rank", rank},
                         {"epsilon", opts.epsilon},
                         {"max_iter", opts.max_iter},
                         {"init", opts.init},
                         {"iterations", result.iterations},
                         {"converged", result.converged},
                         {"relative_residual", result.relative_residual},
                         {"explained_variance", ev},
                         {"wall_seconds", seconds},
                         {"l_star", (dir / "l_star.csv").string()},
                         {"d_star", (dir / "d_star.csv").string()}};
  std::ofstream summary_out(dir / "summary.json");
  if (!summary_out) throw lrd::ParseError("cannot write summary.json");
  summary_out << summary.dump(2) << '\n';

  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_exact_recovery(int n, int rank, int runs, const CommonOpts& opts) {
  lrd::ExactRecoveryParams params;
  params.n = n;
  params.r = rank;
  params.runs = runs;
  params.root_seed = opts.seed;
  params.solver = solver_config(opts);
  params.jobs = opts.jobs;
  const lrd::ExperimentReport report = lrd::run_exact_recovery(params);
  write_experiment_report(report, opts, "exact_recovery");
  print_aggregates(report);
  return 0;
}

int cmd_scaling(const std::string& profile, int runs, int max_n, const CommonOpts& opts) {
  lrd::ScalingParams params;
  params.profile = profile == "fixed-rank" ? lrd::ScalingParams::Profile::FixedRank
                                           : lrd::ScalingParams::Profile::FixedRatio;
  params.runs = runs;
  params.max_n = max_n;
  params.root_seed = opts.seed;
  params.solver = solver_config(opts);
  params.jobs = opts.jobs;
  const lrd::ExperimentReport report = lrd::run_scaling(params);
  write_experiment_report(report, opts,
                          profile == "fixed-rank" ? "scaling_fixed_rank" : "scaling_fixed_ratio");
  print_aggregates(report);
  return 0;
}

int cmd_sampled(int n, int rank, const std::vector<int>& sample_sizes, int runs,
                const CommonOpts& opts) {
  lrd::SampledParams params;
  params.n = n;
  params.r = rank;
  params.sample_sizes = sample_sizes;
  params.runs = runs;
  params.root_seed = opts.seed;
  params.solver = solver_config(opts);
  params.jobs = opts.jobs;
  const lrd::ExperimentReport report = lrd::run_sampled(params);
  write_experiment_report(report, opts, "sampled_covariance");
  print_aggregates(report);
  return 0;
}

int cmd_explained_variance(const std::string& input, const std::vector<int>& ranks,
                           const CommonOpts& opts) {
  const lrd::SymMatrix sigma = lrd::read_sym_matrix(input);
  const lrd::EvSweepReport report =
      lrd::run_explained_variance_sweep(sigma, ranks, solver_config(opts));
  const fs::path dir = ensure_out_dir(opts);
  if (opts.format == "jsonl")
    lrd::write_report_jsonl(report, (dir / "explained_variance.jsonl").string());
  lrd::write_report_csv(report, (dir / "explained_variance.csv").string());
  for (const auto& row : report.rows) {
    if (row.explained_variance_value)
      std::printf("r=%-4d explained_variance=%.12g iterations=%d converged=%d\n", row.r,
                  *row.explained_variance_value, row.iterations, row.converged ? 1 : 0);
    else
      std::printf("r=%-4d explained_variance=degenerate iterations=%d converged=%d\n", row.r,
                  row.iterations, row.converged ? 1 : 0);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decomposes a symmetric covariance matrix into a positive semidefinite "
               "low-rank part plus a nonnegative diagonal, via alternating minimization."};
  app.require_subcommand(1);
  app.footer("Input matrices: dense CSV or whitespace-separated; an optional header row is\n"
             "detected by a non-numeric first token. Exit codes: 0 ok, 2 input error,\n"
             "3 numerical failure.\n"
             "RNG: xoshiro256++ seeded via SplitMix64; per-run child seeds are SplitMix64\n"
             "mixes of the root seed; normal deviates use the Marsaglia polar method.\n"
             "Reports are reproducible bit for bit from the same binary, flags and seed\n"
             "(wall-time fields excepted).");

  CommonOpts opts;

  auto* decompose = app.add_subcommand("decompose", "Decompose a matrix read from file");
  std::string input;
  int rank = 1;
  decompose->add_option("input", input, "Matrix file (CSV or whitespace)")->required();
  decompose->add_option("--rank,-r", rank, "Rank budget for the low-rank part")->required();
  add_solver_flags(decompose, opts);
  decompose->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();

  auto* exact = app.add_subcommand("exact-recovery", "Recovery study on exact instances");
  int n = 40;
  int runs_exact = 200;
  exact->add_option("--n", n, "Matrix order")->capture_default_str();
  exact->add_option("--rank,-r", rank, "True rank of the generated instances")
      ->capture_default_str();
  exact->add_option("--runs", runs_exact, "Monte Carlo runs")->capture_default_str();
  add_solver_flags(exact, opts);
  add_report_flags(exact, opts);

  auto* scaling = app.add_subcommand("scaling", "Timing study across matrix orders");
  std::string profile = "fixed-rank";
  int runs_scaling = 50;
  int max_n = 1280;
  scaling->add_option("--profile", profile, "fixed-rank (r=8) or fixed-ratio (r=n/5)")
      ->check(CLI::IsMember({"fixed-rank", "fixed-ratio"}))
      ->capture_default_str();
  scaling->add_option("--runs", runs_scaling, "Runs per cell")->capture_default_str();
  scaling->add_option("--max-n", max_n,
                      "Largest cell to run (full profile up to n=1280 takes hours)")
      ->capture_default_str();
  add_solver_flags(scaling, opts);
  add_report_flags(scaling, opts);

  auto* sampled = app.add_subcommand("sampled", "Recovery from sample covariances");
  std::vector<int> sample_sizes{200, 500, 1000};
  int runs_sampled = 200;
  sampled->add_option("--n", n, "Matrix order")->capture_default_str();
  sampled->add_option("--rank,-r", rank, "True rank of the generated instances")
      ->capture_default_str();
  sampled->add_option("--sample-sizes", sample_sizes, "Sample sizes, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  sampled->add_option("--runs", runs_sampled, "Monte Carlo runs per sample size")
      ->capture_default_str();
  add_solver_flags(sampled, opts);
  add_report_flags(sampled, opts);

  auto* ev = app.add_subcommand("explained-variance",
                                "Explained variance of a matrix across rank values");
  std::vector<int> ranks;
  ev->add_option("input", input, "Matrix file (CSV or whitespace)")->required();
  ev->add_option("--ranks", ranks, "Rank values, comma separated")->delimiter(',')->required();
  add_solver_flags(ev, opts);
  add_report_flags(ev, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (decompose->parsed()) return cmd_decompose(input, rank, opts);
    if (exact->parsed()) return cmd_exact_recovery(n, rank, runs_exact, opts);
    if (scaling->parsed()) return cmd_scaling(profile, runs_scaling, max_n, opts);
    if (sampled->parsed()) return cmd_sampled(n, rank, sample_sizes, runs_sampled, opts);
    if (ev->parsed()) return cmd_explained_variance(input, ranks, opts);
  } catch (const lrd::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lrd::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
