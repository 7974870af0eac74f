// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Test and measurement harness: the randomized differential runner that
// pits the encrypted evaluator against the plaintext oracle, and the two
// benchmark suites (operation counts, wall-clock timing).

#ifndef HEDB_HARNESS_HPP
#define HEDB_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hedb/estimate.hpp"
#include "hedb/oracle.hpp"
#include "hedb/wire.hpp"

namespace hedb {

// --- Differential runner ---------------------------------------------------

struct DiffOptions {
  unsigned lambda = 2;
  // Corrupts the add gate with this sequence index in every statement
  // executed (mutation-sensitivity checks); kNoFault leaves gates alone.
  uint64_t fault_add_index = CipherEval::kNoFault;
  std::ostream* progress = nullptr;  // one line per scenario when set
};

struct ScenarioOutcome {
  uint64_t scenario_seed = 0;
  unsigned steps = 0;
  std::string failure;  // empty = pass; else the first mismatch, described
};

struct DiffReport {
  uint64_t seed = 0;
  std::vector<ScenarioOutcome> scenarios;
  unsigned failures = 0;
  std::string first_counterexample;
};

// One self-seeded scenario: a random schema (2-4 columns, 4-8 bit uints,
// 2-4 char strings), a random table (up to 16 rows), and 1-3 statements
// drawn from every kind and operator. Each statement runs through the SQL
// text, the encrypted circuit, and the oracle; decrypted results and the
// decrypted table must match the oracle exactly after every step.
ScenarioOutcome run_scenario(uint64_t scenario_seed, const DiffOptions& opts);

DiffReport differential_run(uint64_t seed, unsigned scenarios,
                            const DiffOptions& opts = {});

void print_diff_report(std::ostream& out, const DiffReport& report);
void write_diff_csv(std::ostream& out, const DiffReport& report);

// --- Operation-count benchmark --------------------------------------------

struct BenchOpsRow {
  std::string label;
  OpCounters counters;
};

struct BenchOpsReport {
  unsigned table_rows = 0;
  std::vector<BenchOpsRow> measured;
  std::vector<BenchOpsRow> reference;  // published 10-record measurements
};

// Executes SELECT / UPDATE / DELETE (equality on the first column) over a
// rows-row table of this schema and captures the exact operation counts.
// Counts depend only on the shape, never on the data.
BenchOpsReport bench_ops(const TableSchema& schema, unsigned rows);

void print_ops_report(std::ostream& out, const BenchOpsReport& report);
void write_ops_csv(std::ostream& out, const BenchOpsReport& report);

// --- Timing benchmark ------------------------------------------------------

struct TimingCell {
  unsigned lambda = 0;
  unsigned width = 0;
  double seconds = 0.0;   // best of reps
  bool verified = false;  // decrypted product equals the plaintext product
  OpCounters counters;
};

struct RecryptTiming {
  unsigned lambda = 0;
  double seconds = 0.0;  // best of reps
};

struct BenchTimingReport {
  unsigned reps = 0;
  std::vector<TimingCell> cells;
  std::vector<RecryptTiming> recrypts;
};

// Times the encrypted w x w product across the lambda/width grid and one
// ciphertext refresh per lambda. Keys are sized per cell from the
// estimator so every product decrypts and can be verified.
BenchTimingReport bench_timing(const std::vector<unsigned>& lambdas,
                               const std::vector<unsigned>& widths,
                               unsigned reps = 3);

void print_timing_report(std::ostream& out, const BenchTimingReport& report);
void write_timing_csv(std::ostream& out, const BenchTimingReport& report);

}  // namespace hedb

#endif  // HEDB_HARNESS_HPP
