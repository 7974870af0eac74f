// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Harness tests: the plaintext oracle against hand-computed expectations,
// the randomized differential runner (determinism, clean runs, and
// sensitivity to an injected gate fault), and both benchmark suites.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hedb/error.hpp"
#include "hedb/estimate.hpp"
#include "hedb/harness.hpp"
#include "hedb/oracle.hpp"
#include "hedb/sql.hpp"

using namespace hedb;

namespace {

PlainTable uint_table() {
  PlainTable t;
  t.schema = parse_schema_text("c0:uint:4\nc1:uint:4\n", "t");
  for (auto [a, b] : {std::pair<unsigned, unsigned>{5, 1}, {7, 2}, {5, 3}})
    t.rows.push_back({PlainValue::of_uint(a), PlainValue::of_uint(b)});
  return t;
}

PlainTable string_table() {
  PlainTable t;
  t.schema = parse_schema_text("s:string:24\n", "t");
  for (const char* s : {"ab", "b", "abc", ""})
    t.rows.push_back({PlainValue::of_string(s)});
  return t;
}

OracleResult run(PlainTable& t, const std::string& sql, unsigned n = 1) {
  QueryAst ast = parse_query(sql);
  return oracle_execute(t, ast, n);
}

bool row_is(const std::vector<PlainValue>& row,
            std::initializer_list<uint64_t> vals) {
  if (row.size() != vals.size()) return false;
  size_t i = 0;
  for (uint64_t v : vals)
    if (row[i++].uint_value != v) return false;
  return true;
}

}  // namespace

TEST_CASE("oracle: n-th match selection and aggregates over uints") {
  PlainTable t = uint_table();

  CHECK(row_is(run(t, "SELECT * FROM t WHERE c0 = 5", 1).row, {5, 1}));
  CHECK(row_is(run(t, "SELECT * FROM t WHERE c0 = 5", 2).row, {5, 3}));
  // Past the last match the answer is the all-zeros record.
  CHECK(row_is(run(t, "SELECT * FROM t WHERE c0 = 5", 3).row, {0, 0}));
  CHECK(row_is(run(t, "SELECT * FROM t WHERE c0 = 6", 1).row, {0, 0}));

  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE c0 = 5").count == 2);
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE c0 < 7").count == 2);
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE c0 > 5").count == 1);

  OracleResult avg = run(t, "SELECT AVG(c1) FROM t WHERE c0 = 5");
  CHECK(avg.sum == 4);  // c1 values 1 + 3
  CHECK(avg.count == 2);
  OracleResult none = run(t, "SELECT AVG(c1) FROM t WHERE c0 = 15");
  CHECK(none.sum == 0);
  CHECK(none.count == 0);
}

TEST_CASE("oracle: update rewrites all matches, delete zeroes them") {
  PlainTable t = uint_table();

  run(t, "UPDATE t SET c0 = 1, c1 = 2 WHERE c0 = 7");
  REQUIRE(t.rows.size() == 3);
  CHECK(row_is(t.rows[0], {5, 1}));
  CHECK(row_is(t.rows[1], {1, 2}));
  CHECK(row_is(t.rows[2], {5, 3}));

  run(t, "DELETE FROM t WHERE c0 = 5");
  REQUIRE(t.rows.size() == 3);  // blind delete cannot shrink the table
  CHECK(row_is(t.rows[0], {0, 0}));
  CHECK(row_is(t.rows[1], {1, 2}));
  CHECK(row_is(t.rows[2], {0, 0}));

  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE c0 = 0").count == 2);
}

TEST_CASE("oracle: padded lexicographic order and wildcard matching") {
  PlainTable t = string_table();  // "ab", "b", "abc", ""

  // Comparison pads to the column width, so "ab" < "b" and "" < everything.
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE s < 'b'").count == 3);
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE s > 'ab'").count == 2);
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE s > 'a'").count == 3);

  // '?' matches any character, padding included; a final '*' frees the tail.
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE s = 'a?*'").count == 2);
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE s = '*'").count == 4);
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE s = '\?\?'").count == 3);
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE s = ''").count == 1);

  OracleResult sel = run(t, "SELECT * FROM t WHERE s = 'b'", 1);
  REQUIRE(sel.row.size() == 1);
  CHECK(sel.row[0].string_value == "b");

  run(t, "DELETE FROM t WHERE s = 'a*'");
  CHECK(t.rows[0][0].string_value.empty());
  CHECK(t.rows[1][0].string_value == "b");
  CHECK(t.rows[2][0].string_value.empty());
  CHECK(run(t, "SELECT COUNT(*) FROM t WHERE s = ''").count == 3);
}

TEST_CASE("oracle: zero rows and validation mirror the front end") {
  PlainTable t = uint_table();
  std::vector<PlainValue> z = zero_row(string_table().schema);
  REQUIRE(z.size() == 1);
  CHECK(z[0].string_value.empty());
  CHECK(plain_equal(PlainValue::of_uint(3), PlainValue::of_uint(3)));
  CHECK(!plain_equal(PlainValue::of_uint(3), PlainValue::of_uint(4)));

  try {
    run(t, "SELECT * FROM t WHERE bogus = 1");
    FAIL("unknown column must be rejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownColumn);
  }
}

TEST_CASE("scenarios are deterministic functions of their seed") {
  ScenarioOutcome a = run_scenario(4242, {});
  ScenarioOutcome b = run_scenario(4242, {});
  CHECK(a.scenario_seed == 4242);
  CHECK(a.steps == b.steps);
  CHECK(a.steps >= 1);
  CHECK(a.steps <= 3);
  CHECK(a.failure == b.failure);
  CHECK(a.failure.empty());
}

TEST_CASE("a clean differential run matches the oracle everywhere") {
  DiffReport report = differential_run(1234, 3);
  CHECK(report.seed == 1234);
  REQUIRE(report.scenarios.size() == 3);
  CHECK(report.failures == 0);
  CHECK(report.first_counterexample.empty());

  // Every scenario can be replayed in isolation from its own seed.
  for (const ScenarioOutcome& oc : report.scenarios) {
    CHECK(oc.failure.empty());
    ScenarioOutcome again = run_scenario(oc.scenario_seed, {});
    CHECK(again.steps == oc.steps);
    CHECK(again.failure.empty());
  }
  CHECK(report.scenarios[0].scenario_seed !=
        report.scenarios[1].scenario_seed);

  std::ostringstream txt;
  print_diff_report(txt, report);
  CHECK(txt.str().find("failures=0") != std::string::npos);
  CHECK(txt.str().find("matched the plaintext oracle") != std::string::npos);

  std::ostringstream csv;
  write_diff_csv(csv, report);
  CHECK(csv.str().rfind("scenario,seed,steps,status,failure", 0) == 0);
  CHECK(csv.str().find(",pass,") != std::string::npos);
  CHECK(csv.str().find(",fail,") == std::string::npos);
}

TEST_CASE("a single corrupted gate does not escape the differential run") {
  DiffReport clean = differential_run(977, 5);
  CHECK(clean.failures == 0);

  DiffOptions fault;
  fault.fault_add_index = 0;  // corrupt the first addition of every statement
  std::ostringstream progress;
  fault.progress = &progress;
  DiffReport broken = differential_run(977, 5, fault);
  CHECK(broken.failures > 0);
  CHECK(!broken.first_counterexample.empty());

  // One progress line per scenario.
  size_t lines = 0;
  for (char c : progress.str())
    if (c == '\n') ++lines;
  CHECK(lines == 5);

  std::ostringstream txt;
  print_diff_report(txt, broken);
  CHECK(txt.str().find("reproduce with: hedb-bench diff --scenario-seed") !=
        std::string::npos);
}

TEST_CASE("operation counts: select dwarfs update dwarfs delete") {
  TableSchema demo =
      parse_schema_text("id:uint:8\nname:string:64\nage:uint:8\n", "patients");
  BenchOpsReport report = bench_ops(demo, 10);
  CHECK(report.table_rows == 10);
  REQUIRE(report.measured.size() == 3);
  CHECK(report.measured[0].label == "SELECT");
  CHECK(report.measured[1].label == "UPDATE");
  CHECK(report.measured[2].label == "DELETE");

  const uint64_t sel = report.measured[0].counters.total();
  const uint64_t upd = report.measured[1].counters.total();
  const uint64_t del = report.measured[2].counters.total();
  CHECK(sel > upd);
  CHECK(upd > del);
  CHECK(del > 0);

  // The measured counts replay from the statement shape alone.
  SecurityParams probe{};
  probe.n_bits = 2;
  const StatementKind kinds[] = {StatementKind::Select, StatementKind::Update,
                                 StatementKind::Delete};
  for (size_t i = 0; i < 3; ++i) {
    StatementShape sh{};
    sh.kind = kinds[i];
    sh.op = PredOp::Eq;
    sh.rows = 10;
    sh.operand_bits = 8;
    sh.record_bits = 80;
    CHECK(estimate_statement(probe, sh).counters ==
          report.measured[i].counters);
  }

  // The frozen reference column reproduces the published 10-record counts.
  REQUIRE(report.reference.size() == 3);
  CHECK(report.reference[0].counters.total() == 619839);
  CHECK(report.reference[1].counters.total() == 67595);
  CHECK(report.reference[2].counters.total() == 28171);
  CHECK(report.reference[0].counters.additions == 309892);
  CHECK(report.reference[0].counters.multiplications == 309947);

  std::ostringstream txt;
  print_ops_report(txt, report);
  CHECK(txt.str().find("operation counts over a 10-row encrypted table") !=
        std::string::npos);
  CHECK(txt.str().find("not asserted") != std::string::npos);

  std::ostringstream csv;
  write_ops_csv(csv, report);
  CHECK(csv.str().rfind("source,statement,total,additions,multiplications",
                        0) == 0);
  CHECK(csv.str().find("measured,SELECT,") != std::string::npos);
  CHECK(csv.str().find("reference,DELETE,28171,5643,22528") !=
        std::string::npos);
}

TEST_CASE("timing benchmark verifies its products and reports refreshes") {
  BenchTimingReport report = bench_timing({2}, {4}, 1);
  CHECK(report.reps == 1);
  REQUIRE(report.cells.size() == 1);
  const TimingCell& cell = report.cells[0];
  CHECK(cell.lambda == 2);
  CHECK(cell.width == 4);
  CHECK(cell.verified);
  CHECK(cell.counters.total() > 0);
  CHECK(cell.seconds >= 0.0);
  CHECK(cell.seconds < 60.0);
  REQUIRE(report.recrypts.size() == 1);
  CHECK(report.recrypts[0].lambda == 2);
  CHECK(report.recrypts[0].seconds >= 0.0);

  std::ostringstream csv;
  write_timing_csv(csv, report);
  CHECK(csv.str().rfind("kind,lambda,width,seconds", 0) == 0);
  CHECK(csv.str().find("product,2,4,") != std::string::npos);
  CHECK(csv.str().find("recrypt,2,,") != std::string::npos);

  std::ostringstream txt;
  print_timing_report(txt, report);
  CHECK(txt.str().find("encrypted product wall time (best of 1)") !=
        std::string::npos);
  CHECK(txt.str().find("days) for one row.") != std::string::npos);
}
