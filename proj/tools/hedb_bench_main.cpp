// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// hedb-bench: operation-count and wall-time benchmarks, plus the randomized
// differential runner that checks encrypted execution against a plaintext
// oracle.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hedb/encoding.hpp"
#include "hedb/error.hpp"
#include "hedb/harness.hpp"
#include "hedb/rng.hpp"

namespace {

hedb::TableSchema demo_schema() {
  std::string text = "id:uint:8\nname:string:64\nage:uint:8\n";
  return hedb::parse_schema_text(text, "patients");
}

hedb::TableSchema schema_from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw hedb::Error(hedb::ErrorCode::IoError,
                      "cannot open schema file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  auto slash = stem.find_last_of('/');
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  auto dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return hedb::parse_schema_text(buf.str(), stem);
}

void write_file(const std::string& path, const std::string& body,
                std::ostream& out) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw hedb::Error(hedb::ErrorCode::IoError,
                      "cannot write '" + path + "'");
  f << body;
  out << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hedb-bench: benchmarks and the differential runner"};
  app.require_subcommand(1);

  auto* ops = app.add_subcommand(
      "ops", "count homomorphic operations per statement kind");
  unsigned rows = 10;
  std::string schema_path;
  std::string ops_csv = "ops.csv";
  ops->add_option("--rows", rows, "table rows")->capture_default_str();
  ops->add_option("--schema", schema_path,
                  "schema file (default: the 3-column demo schema)");
  ops->add_option("--csv", ops_csv, "CSV output path")->capture_default_str();

  auto* timing = app.add_subcommand(
      "timing", "time the bit-multiplication workload across parameters");
  std::vector<unsigned> lambdas{2, 3, 4};
  std::vector<unsigned> widths{4, 8, 16};
  unsigned reps = 3;
  std::string timing_csv = "timing.csv";
  timing->add_option("--lambdas", lambdas, "security parameters to sweep")
      ->delimiter(',')
      ->capture_default_str();
  timing->add_option("--widths", widths, "operand bit widths to sweep")
      ->delimiter(',')
      ->capture_default_str();
  timing->add_option("--reps", reps, "repetitions per cell; the minimum wins")
      ->capture_default_str();
  timing->add_option("--csv", timing_csv, "CSV output path")
      ->capture_default_str();

  auto* diff = app.add_subcommand(
      "diff", "randomized differential check against a plaintext oracle");
  uint64_t seed = 0;
  uint64_t scenario_seed = 0;
  unsigned scenarios = 200;
  unsigned diff_lambda = 2;
  std::string diff_csv = "diff.csv";
  bool progress = false;
  auto* seed_opt =
      diff->add_option("--seed", seed, "master seed (default: HEDB_SEED or "
                                       "a fresh random seed)");
  auto* scenario_opt = diff->add_option(
      "--scenario-seed", scenario_seed,
      "re-run one scenario by its own seed, as printed in a failure report");
  diff->add_option("--scenarios", scenarios, "number of scenarios")
      ->capture_default_str();
  diff->add_option("--lambda", diff_lambda, "security parameter")
      ->capture_default_str();
  diff->add_option("--csv", diff_csv, "CSV output path")
      ->capture_default_str();
  diff->add_flag("--progress", progress, "print one line per scenario");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ops->parsed()) {
      hedb::TableSchema schema =
          schema_path.empty() ? demo_schema() : schema_from_file(schema_path);
      hedb::BenchOpsReport report = hedb::bench_ops(schema, rows);
      hedb::print_ops_report(std::cout, report);
      std::ostringstream csv;
      hedb::write_ops_csv(csv, report);
      write_file(ops_csv, csv.str(), std::cout);
      return 0;
    }

    if (timing->parsed()) {
      hedb::BenchTimingReport report =
          hedb::bench_timing(lambdas, widths, reps);
      hedb::print_timing_report(std::cout, report);
      std::ostringstream csv;
      hedb::write_timing_csv(csv, report);
      write_file(timing_csv, csv.str(), std::cout);
      return 0;
    }

    hedb::DiffOptions opts;
    opts.lambda = diff_lambda;
    if (progress) opts.progress = &std::cout;

    if (scenario_opt->count() > 0) {
      hedb::ScenarioOutcome outcome = hedb::run_scenario(scenario_seed, opts);
      if (outcome.failure.empty()) {
        std::cout << "scenario seed " << outcome.scenario_seed << ": pass ("
                  << outcome.steps << " steps)\n";
        return 0;
      }
      std::cout << "scenario seed " << outcome.scenario_seed << ": FAIL\n  "
                << outcome.failure << "\n";
      return 1;
    }

    if (seed_opt->count() == 0) seed = hedb::default_seed();
    hedb::DiffReport report = hedb::differential_run(seed, scenarios, opts);
    hedb::print_diff_report(std::cout, report);
    std::ostringstream csv;
    hedb::write_diff_csv(csv, report);
    write_file(diff_csv, csv.str(), std::cout);
    return report.failures == 0 ? 0 : 1;
  } catch (const hedb::Error& e) {
    std::cerr << "error (" << hedb::error_code_name(e.code())
              << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
