#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "lrd/experiments.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using lrd::ExperimentReport;
using lrd::RunRecord;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "lrd_experiment_tests";
  fs::create_directories(dir);
  return dir;
}

bool same_modulo_timing(const RunRecord& a, const RunRecord& b) {
  return a.run_index == b.run_index && a.seed == b.seed && a.n == b.n && a.r == b.r &&
         a.sample_size == b.sample_size && a.iterations == b.iterations &&
         a.converged == b.converged && a.trace_monotone == b.trace_monotone &&
         a.relative_residual == b.relative_residual &&
         a.rel_decomp_error == b.rel_decomp_error && a.rel_error_l == b.rel_error_l &&
         a.rel_error_d == b.rel_error_d && a.sanity_gap == b.sanity_gap &&
         a.explained_variance_value == b.explained_variance_value;
}

}  // namespace

TEST_CASE("child seeds are deterministic and distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(lrd::child_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(lrd::child_seed(42, 7) == lrd::child_seed(42, 7));
  CHECK(lrd::child_seed(42, 7) != lrd::child_seed(43, 7));
}

TEST_CASE("experiment content is independent of the job count") {
  lrd::ExactRecoveryParams params;
  params.n = 12;
  params.r = 3;
  params.runs = 4;
  params.root_seed = 77;
  params.solver.epsilon = 1e-9;

  params.jobs = 1;
  const ExperimentReport serial = lrd::run_exact_recovery(params);
  params.jobs = 2;
  const ExperimentReport parallel = lrd::run_exact_recovery(params);

  REQUIRE(serial.records.size() == 4);
  REQUIRE(parallel.records.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(same_modulo_timing(serial.records[i], parallel.records[i]));

  // Deterministic repeat.
  const ExperimentReport again = lrd::run_exact_recovery(params);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(same_modulo_timing(parallel.records[i], again.records[i]));
}

TEST_CASE("aggregates are recomputable from the records") {
  lrd::SampledParams params;
  params.n = 10;
  params.r = 2;
  params.sample_sizes = {50, 100};
  params.runs = 3;
  params.root_seed = 5;
  params.solver.max_iter = 200;
  params.jobs = 2;
  const ExperimentReport report = lrd::run_sampled(params);

  REQUIRE(report.records.size() == 6);
  const auto recomputed = lrd::aggregate_records(report.records);
  REQUIRE(recomputed.size() == report.aggregates.size());
  for (std::size_t c = 0; c < recomputed.size(); ++c) {
    CHECK(recomputed[c].n == report.aggregates[c].n);
    CHECK(recomputed[c].count == report.aggregates[c].count);
    CHECK(recomputed[c].time_mean == report.aggregates[c].time_mean);
    CHECK(recomputed[c].rel_decomp_error_max == report.aggregates[c].rel_decomp_error_max);
    CHECK(recomputed[c].sanity_gap_max == report.aggregates[c].sanity_gap_max);
  }

  for (const auto& rec : report.records) {
    CHECK(rec.sanity_gap.has_value());
    CHECK(rec.trace_monotone);
  }
}

TEST_CASE("median decomposition error shrinks as the sample grows") {
  lrd::SampledParams params;
  params.n = 20;
  params.r = 3;
  params.sample_sizes = {100, 1000};
  params.runs = 8;
  params.root_seed = 99;
  params.solver.max_iter = 300;
  params.jobs = 2;
  const ExperimentReport report = lrd::run_sampled(params);

  auto median_error = [&](int n_samples) {
    std::vector<double> errs;
    for (const auto& rec : report.records)
      if (rec.sample_size == n_samples) errs.push_back(rec.rel_decomp_error);
    std::sort(errs.begin(), errs.end());
    return 0.5 * (errs[errs.size() / 2 - 1] + errs[errs.size() / 2]);
  };
  CHECK(median_error(1000) < median_error(100));
}

TEST_CASE("scaling profiles pick the documented cells") {
  const auto fixed_rank = lrd::scaling_cells(lrd::ScalingParams::Profile::FixedRank, 80);
  REQUIRE(fixed_rank.size() == 3);
  CHECK(fixed_rank[0] == std::pair{20, 8});
  CHECK(fixed_rank[2] == std::pair{80, 8});

  const auto fixed_ratio = lrd::scaling_cells(lrd::ScalingParams::Profile::FixedRatio, 1280);
  REQUIRE(fixed_ratio.size() == 7);
  CHECK(fixed_ratio[0] == std::pair{20, 4});
  CHECK(fixed_ratio[6] == std::pair{1280, 256});

  lrd::ScalingParams params;
  params.runs = 2;
  params.max_n = 40;
  params.root_seed = 3;
  const ExperimentReport report = lrd::run_scaling(params);
  REQUIRE(report.records.size() == 4);
  CHECK(report.records[0].n == 20);
  CHECK(report.records[3].n == 40);
  CHECK(report.aggregates.size() == 2);
  CHECK(report.aggregates[0].count == 2);
}

TEST_CASE("jsonl reports round-trip through a parser") {
  lrd::ExactRecoveryParams params;
  params.n = 10;
  params.r = 2;
  params.runs = 3;
  params.root_seed = 11;
  const ExperimentReport report = lrd::run_exact_recovery(params);

  const fs::path jsonl = temp_dir() / "report.jsonl";
  lrd::write_report_jsonl(report, jsonl.string());

  std::ifstream in(jsonl);
  REQUIRE(in.good());
  std::string line;
  int run_lines = 0;
  nlohmann::json summary;
  while (std::getline(in, line)) {
    const nlohmann::json j = nlohmann::json::parse(line);
    if (j.at("type") == "run") {
      ++run_lines;
      const int idx = j.at("run_index").get<int>();
      CHECK(j.at("seed").get<std::uint64_t>() == report.records[idx].seed);
      CHECK(j.at("rel_decomp_error").get<double>() == report.records[idx].rel_decomp_error);
      CHECK(j.at("sanity_gap").is_null());
    } else {
      summary = j;
    }
  }
  CHECK(run_lines == 3);
  REQUIRE(summary.is_object());
  CHECK(summary.at("kind") == "exact-recovery");
  CHECK(summary.at("root_seed").get<std::uint64_t>() == 11);
  REQUIRE(summary.at("aggregates").size() == 1);
  CHECK(summary.at("aggregates")[0].at("rel_decomp_error_max").get<double>() ==
        report.aggregates[0].rel_decomp_error_max);

  const fs::path records_csv = temp_dir() / "records.csv";
  const fs::path aggregates_csv = temp_dir() / "aggregates.csv";
  lrd::write_report_csv(report, records_csv.string(), aggregates_csv.string());
  std::ifstream csv(records_csv);
  int csv_lines = 0;
  while (std::getline(csv, line)) ++csv_lines;
  CHECK(csv_lines == 4);  // header + 3 records
}

TEST_CASE("explained-variance sweep flags degenerate ranks") {
  lrd::SymMatrix eye(4);
  for (int i = 0; i < 4; ++i) eye.set(i, i, 1.0);
  const lrd::EvSweepReport degenerate = lrd::run_explained_variance_sweep(eye, {1, 2});
  REQUIRE(degenerate.rows.size() == 2);
  for (const auto& row : degenerate.rows) CHECK_FALSE(row.explained_variance_value.has_value());

  const lrd::GroundTruth truth = lrd::generate_factor_model(12, 3, 31);
  lrd::SolverConfig config;
  config.epsilon = 1e-11;
  const lrd::EvSweepReport exact = lrd::run_explained_variance_sweep(truth.sigma, {3}, config);
  REQUIRE(exact.rows.size() == 1);
  REQUIRE(exact.rows[0].explained_variance_value.has_value());
  CHECK(*exact.rows[0].explained_variance_value == Catch::Approx(1.0).margin(1e-9));

  const fs::path jsonl = temp_dir() / "ev.jsonl";
  const fs::path csv = temp_dir() / "ev.csv";
  lrd::write_report_jsonl(exact, jsonl.string());
  lrd::write_report_csv(exact, csv.string());
  CHECK(fs::exists(jsonl));
  CHECK(fs::exists(csv));
}

TEST_CASE("parameter validation") {
  lrd::ExactRecoveryParams bad;
  bad.runs = 0;
  CHECK_THROWS_AS(lrd::run_exact_recovery(bad), lrd::InvalidDimsError);

  lrd::SampledParams no_sizes;
  no_sizes.sample_sizes = {};
  CHECK_THROWS_AS(lrd::run_sampled(no_sizes), lrd::InvalidDimsError);

  lrd::ScalingParams tiny;
  tiny.max_n = 10;
  CHECK_THROWS_AS(lrd::run_scaling(tiny), lrd::InvalidDimsError);
}
