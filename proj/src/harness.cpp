// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/harness.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "hedb/error.hpp"
#include "hedb/table.hpp"

namespace hedb {

namespace {

// --- Scenario generation ---------------------------------------------------

constexpr char kAlphabet[] = "abcd";

std::string rand_string(Rng& rng, unsigned max_chars) {
  const auto len = static_cast<unsigned>(rng.below_u64(max_chars + 1));
  std::string s;
  s.reserve(len);
  for (unsigned i = 0; i < len; ++i)
    s.push_back(kAlphabet[rng.below_u64(4)]);
  return s;
}

PlainValue rand_value(Rng& rng, const ColumnSpec& col) {
  if (col.kind == ColumnKind::Uint)
    return PlainValue::of_uint(rng.below_u64(uint64_t{1} << col.bit_width));
  return PlainValue::of_string(rand_string(rng, col.char_count()));
}

struct Scenario {
  TableSchema schema;
  std::vector<std::vector<PlainValue>> rows;
  struct Step {
    std::string sql;
    unsigned n = 1;
  };
  std::vector<Step> steps;
};

PlainValue make_pattern(Rng& rng, std::string base, const ColumnSpec& col) {
  if (base.empty()) base = rand_string(rng, col.char_count());
  for (char& c : base)
    if (rng.below_u64(10) < 3) c = '?';
  if (rng.below_u64(10) < 4) {
    const size_t cut = rng.below_u64(base.size() + 1);
    base = base.substr(0, cut) + "*";
  }
  return PlainValue::of_string(base);
}

Scenario::Step make_step(Rng& rng, const Scenario& sc) {
  QueryAst ast;
  ast.table = sc.schema.table_name;

  const size_t pc = rng.below_u64(sc.schema.columns.size());
  const ColumnSpec& col = sc.schema.columns[pc];
  ast.pred.column = col.name;
  PlainValue lit;
  if (!sc.rows.empty() && rng.below_u64(10) < 6)
    lit = sc.rows[rng.below_u64(sc.rows.size())][pc];
  else
    lit = rand_value(rng, col);
  if (col.kind == ColumnKind::Uint) {
    ast.pred.op = "=<>"[rng.below_u64(3)];
  } else {
    const uint64_t r = rng.below_u64(4);
    if (r == 3) {
      ast.pred.op = '=';
      lit = make_pattern(rng, lit.string_value, col);
    } else {
      ast.pred.op = "=<>"[r];
    }
  }
  ast.pred.literal = lit;

  switch (rng.below_u64(5)) {
    case 0:
      ast.kind = StatementKind::Select;
      break;
    case 1: {
      ast.kind = StatementKind::Update;
      for (const ColumnSpec& c : sc.schema.columns) {
        SqlAssignment a;
        a.column = c.name;
        a.literal = rand_value(rng, c);
        ast.assignments.push_back(std::move(a));
      }
      break;
    }
    case 2:
      ast.kind = StatementKind::Delete;
      break;
    case 3:
      ast.kind = StatementKind::Count;
      break;
    default: {
      std::vector<size_t> uint_cols;
      for (size_t i = 0; i < sc.schema.columns.size(); ++i)
        if (sc.schema.columns[i].kind == ColumnKind::Uint)
          uint_cols.push_back(i);
      if (uint_cols.empty()) {
        ast.kind = StatementKind::Count;
      } else {
        ast.kind = StatementKind::Avg;
        ast.target_column =
            sc.schema.columns[uint_cols[rng.below_u64(uint_cols.size())]]
                .name;
      }
      break;
    }
  }

  Scenario::Step step;
  step.sql = render_query(ast);
  step.n = ast.kind == StatementKind::Select
               ? 1 + static_cast<unsigned>(rng.below_u64(sc.rows.size() + 1))
               : 1;
  return step;
}

Scenario make_scenario(Rng& rng) {
  Scenario sc;
  sc.schema.table_name = "t";
  const auto ncols = 2 + static_cast<unsigned>(rng.below_u64(3));
  for (unsigned i = 0; i < ncols; ++i) {
    ColumnSpec col;
    col.name = "c" + std::to_string(i);
    if (rng.below_u64(2) == 0) {
      col.kind = ColumnKind::Uint;
      col.bit_width = 4 + static_cast<unsigned>(rng.below_u64(5));
    } else {
      col.kind = ColumnKind::String;
      col.bit_width = 8 * (2 + static_cast<unsigned>(rng.below_u64(3)));
    }
    sc.schema.columns.push_back(std::move(col));
  }
  sc.schema.validate();

  const auto nrows = static_cast<unsigned>(rng.below_u64(17));
  for (unsigned r = 0; r < nrows; ++r) {
    std::vector<PlainValue> row;
    row.reserve(ncols);
    for (const ColumnSpec& col : sc.schema.columns)
      row.push_back(rand_value(rng, col));
    sc.rows.push_back(std::move(row));
  }

  const auto nsteps = 1 + static_cast<unsigned>(rng.below_u64(3));
  for (unsigned s = 0; s < nsteps; ++s) sc.steps.push_back(make_step(rng, sc));
  return sc;
}

// --- Scenario execution ----------------------------------------------------

StatementShape shape_of(const ValidatedQuery& vq, const TableSchema& schema,
                        unsigned rows, uint32_t cell_noise) {
  StatementShape shape;
  shape.kind = vq.ast.kind;
  shape.op = vq.op;
  shape.rows = rows;
  shape.operand_bits = schema.columns[vq.column_index].bit_width;
  shape.record_bits = schema.record_bits();
  if (vq.op == PredOp::Pattern) {
    shape.pattern_chars = static_cast<unsigned>(vq.pattern.mask.size());
    for (uint8_t m : vq.pattern.mask) shape.pattern_literals += m ? 1u : 0u;
    shape.prefix_only = vq.pattern.prefix_only;
  }
  if (vq.ast.kind == StatementKind::Avg)
    shape.avg_bits = schema.columns[vq.avg_column_index].bit_width;
  shape.cell_noise = cell_noise;
  return shape;
}

bool is_mutation(StatementKind kind) {
  return kind == StatementKind::Update || kind == StatementKind::Delete;
}

std::string describe_row(const std::vector<PlainValue>& row) {
  std::string s = "(";
  for (size_t i = 0; i < row.size(); ++i) {
    if (i) s += ", ";
    s += row[i].display();
  }
  return s + ")";
}

// Decrypts the flat record payload and decodes it column by column.
std::vector<PlainValue> decode_flat_record(const EncryptedWord& flat,
                                           const TableSchema& schema,
                                           const SecretKey& sk) {
  std::vector<uint8_t> bits;
  bits.reserve(flat.bits.size());
  for (const Ciphertext& ct : flat.bits)
    bits.push_back(static_cast<uint8_t>(decrypt_bit(ct, sk)));
  std::vector<PlainValue> row;
  size_t off = 0;
  for (const ColumnSpec& col : schema.columns) {
    const std::vector<uint8_t> slice(bits.begin() + off,
                                     bits.begin() + off + col.bit_width);
    row.push_back(decode_value_bits(slice, col));
    off += col.bit_width;
  }
  return row;
}

uint64_t decrypt_uint_word(const EncryptedWord& w, const SecretKey& sk) {
  std::vector<uint8_t> bits;
  bits.reserve(w.bits.size());
  for (const Ciphertext& ct : w.bits)
    bits.push_back(static_cast<uint8_t>(decrypt_bit(ct, sk)));
  return decode_uint_bits(bits);
}

std::string compare_tables(const EncryptedTable& et, const PlainTable& pt,
                           const SecretKey& sk) {
  for (size_t r = 0; r < et.rows.size(); ++r) {
    const std::vector<PlainValue> got =
        decrypt_record(et.rows[r], et.schema, sk);
    for (size_t c = 0; c < got.size(); ++c)
      if (!plain_equal(got[c], pt.rows[r][c]))
        return "table mismatch at row " + std::to_string(r) + " column " +
               et.schema.columns[c].name + ": expected " +
               pt.rows[r][c].display() + ", decrypted " + got[c].display();
  }
  return "";
}

}  // namespace

ScenarioOutcome run_scenario(uint64_t scenario_seed, const DiffOptions& opts) {
  ScenarioOutcome oc;
  oc.scenario_seed = scenario_seed;
  Rng rng(scenario_seed);
  const Scenario sc = make_scenario(rng);
  oc.steps = static_cast<unsigned>(sc.steps.size());

  // Size the key for the whole statement sequence, cell noise included.
  SecurityParams probe{};
  probe.n_bits = opts.lambda;
  std::vector<QueryAst> asts;
  std::vector<ValidatedQuery> vqs;
  uint32_t watermark = 0;
  uint32_t budget = 0;
  for (const Scenario::Step& step : sc.steps) {
    QueryAst ast = parse_query(step.sql);
    ValidatedQuery vq = validate_query(ast, sc.schema);
    const StatementEstimate est = estimate_statement(
        probe, shape_of(vq, sc.schema,
                        static_cast<unsigned>(sc.rows.size()), watermark));
    budget = std::max(budget, est.out_noise);
    if (is_mutation(ast.kind)) watermark = est.out_noise;
    asts.push_back(std::move(ast));
    vqs.push_back(std::move(vq));
  }

  const SecurityParams params =
      SecurityParams::for_budget(opts.lambda, budget);
  Rng krng = rng.fork();
  KeySet keys = keygen(params, krng);

  PlainTable pt{sc.schema, sc.rows};
  EncryptedTable et;
  et.schema = sc.schema;
  et.ctx = keys.ctx;
  for (const std::vector<PlainValue>& row : sc.rows)
    append_row(et, encrypt_record(row, sc.schema, keys, krng));

  for (size_t s = 0; s < sc.steps.size(); ++s) {
    CompiledQuery cq =
        compile_query(vqs[s], sc.schema, sc.steps[s].n, keys, krng);
    StatementInput in = to_statement_input(std::move(cq), sc.schema);
    ExecOptions eo;
    eo.fault_add_index = opts.fault_add_index;
    ExecResult res = execute_statement(et, in, eo);
    OracleResult orc = oracle_execute(pt, asts[s], sc.steps[s].n);

    std::string mismatch;
    switch (asts[s].kind) {
      case StatementKind::Select: {
        const std::vector<PlainValue> got =
            decode_flat_record(res.record, sc.schema, keys.sk);
        for (size_t c = 0; c < got.size() && mismatch.empty(); ++c)
          if (!plain_equal(got[c], orc.row[c]))
            mismatch = "SELECT n=" + std::to_string(sc.steps[s].n) +
                       ": expected " + describe_row(orc.row) +
                       ", decrypted " + describe_row(got);
        break;
      }
      case StatementKind::Count: {
        const uint64_t got = decrypt_uint_word(res.count, keys.sk);
        if (got != orc.count)
          mismatch = "COUNT: expected " + std::to_string(orc.count) +
                     ", decrypted " + std::to_string(got);
        break;
      }
      case StatementKind::Avg: {
        const uint64_t sum = decrypt_uint_word(res.sum, keys.sk);
        const uint64_t count = decrypt_uint_word(res.count, keys.sk);
        if (sum != orc.sum || count != orc.count)
          mismatch = "AVG: expected sum=" + std::to_string(orc.sum) +
                     " count=" + std::to_string(orc.count) +
                     ", decrypted sum=" + std::to_string(sum) +
                     " count=" + std::to_string(count);
        break;
      }
      case StatementKind::Update:
      case StatementKind::Delete: {
        et.rows = std::move(res.new_rows);
        mismatch = compare_tables(et, pt, keys.sk);
        break;
      }
    }
    if (!mismatch.empty()) {
      oc.failure = "step " + std::to_string(s) + " [" + sc.steps[s].sql +
                   "]: " + mismatch;
      return oc;
    }
  }
  return oc;
}

DiffReport differential_run(uint64_t seed, unsigned scenarios,
                            const DiffOptions& opts) {
  DiffReport report;
  report.seed = seed;
  Rng master(seed);
  for (unsigned i = 0; i < scenarios; ++i) {
    const uint64_t scenario_seed = master.u64();
    ScenarioOutcome oc;
    try {
      oc = run_scenario(scenario_seed, opts);
    } catch (const std::exception& e) {
      oc.scenario_seed = scenario_seed;
      oc.failure = std::string("exception: ") + e.what();
    }
    if (!oc.failure.empty()) {
      ++report.failures;
      if (report.first_counterexample.empty())
        report.first_counterexample =
            "scenario " + std::to_string(i) + " (seed " +
            std::to_string(oc.scenario_seed) + "): " + oc.failure;
    }
    if (opts.progress)
      *opts.progress << "scenario " << i << " seed " << oc.scenario_seed
                     << " " << (oc.failure.empty() ? "pass" : "FAIL")
                     << "\n";
    report.scenarios.push_back(std::move(oc));
  }
  return report;
}

void print_diff_report(std::ostream& out, const DiffReport& report) {
  out << "differential run: seed=" << report.seed
      << " scenarios=" << report.scenarios.size()
      << " failures=" << report.failures << "\n";
  if (report.failures == 0) {
    out << "all decrypted results matched the plaintext oracle exactly\n";
  } else {
    out << "first counterexample: " << report.first_counterexample << "\n";
    uint64_t repro = 0;
    for (const ScenarioOutcome& oc : report.scenarios)
      if (!oc.failure.empty()) {
        repro = oc.scenario_seed;
        break;
      }
    out << "reproduce with: hedb-bench diff --scenario-seed " << repro
        << "\n";
  }
}

void write_diff_csv(std::ostream& out, const DiffReport& report) {
  out << "scenario,seed,steps,status,failure\n";
  for (size_t i = 0; i < report.scenarios.size(); ++i) {
    const ScenarioOutcome& oc = report.scenarios[i];
    std::string failure = oc.failure;
    for (char& c : failure)
      if (c == ',' || c == '\n') c = ';';
    out << i << "," << oc.scenario_seed << "," << oc.steps << ","
        << (oc.failure.empty() ? "pass" : "fail") << "," << failure << "\n";
  }
}

// --- Operation counts ------------------------------------------------------

BenchOpsReport bench_ops(const TableSchema& schema, unsigned rows) {
  BenchOpsReport report;
  report.table_rows = rows;

  Rng rng(default_seed());
  SecurityParams probe{};
  probe.n_bits = 2;
  uint32_t budget = 0;
  for (StatementKind kind :
       {StatementKind::Select, StatementKind::Update, StatementKind::Delete}) {
    StatementShape shape;
    shape.kind = kind;
    shape.op = PredOp::Eq;
    shape.rows = rows;
    shape.operand_bits = schema.columns[0].bit_width;
    shape.record_bits = schema.record_bits();
    budget = std::max(budget, estimate_statement(probe, shape).out_noise);
  }
  const SecurityParams params = SecurityParams::for_budget(2, budget);
  KeySet keys = keygen(params, rng);

  EncryptedTable table;
  table.schema = schema;
  table.ctx = keys.ctx;
  for (unsigned r = 0; r < rows; ++r) {
    std::vector<PlainValue> row;
    for (const ColumnSpec& col : schema.columns)
      row.push_back(rand_value(rng, col));
    append_row(table, encrypt_record(row, schema, keys, rng));
  }

  for (StatementKind kind :
       {StatementKind::Select, StatementKind::Update, StatementKind::Delete}) {
    QueryAst ast;
    ast.kind = kind;
    ast.table = schema.table_name;
    ast.pred.column = schema.columns[0].name;
    ast.pred.op = '=';
    ast.pred.literal = rand_value(rng, schema.columns[0]);
    if (kind == StatementKind::Update)
      for (const ColumnSpec& col : schema.columns) {
        SqlAssignment a;
        a.column = col.name;
        a.literal = rand_value(rng, col);
        ast.assignments.push_back(std::move(a));
      }
    const ValidatedQuery vq = validate_query(ast, schema);
    CompiledQuery cq = compile_query(vq, schema, 1, keys, rng);
    StatementInput in = to_statement_input(std::move(cq), schema);
    const ExecResult res = execute_statement(table, in);
    report.measured.push_back(
        {std::string(statement_kind_name(kind)), res.counters});
  }

  report.reference = {
      {"SELECT", OpCounters{309892, 309947, 0}},
      {"UPDATE", OpCounters{25355, 42240, 0}},
      {"DELETE", OpCounters{5643, 22528, 0}},
  };
  return report;
}

namespace {

void ops_table(std::ostream& out, const std::vector<BenchOpsRow>& rows) {
  out << std::left << std::setw(11) << "statement" << std::right
      << std::setw(13) << "Add. & Mult." << std::setw(9) << "Add."
      << std::setw(9) << "Mult." << "\n";
  out << std::left << std::setw(11) << "---------" << std::right
      << std::setw(13) << "------------" << std::setw(9) << "----"
      << std::setw(9) << "-----" << "\n";
  for (const BenchOpsRow& row : rows)
    out << std::left << std::setw(11) << row.label << std::right
        << std::setw(13) << row.counters.total() << std::setw(9)
        << row.counters.additions << std::setw(9)
        << row.counters.multiplications << "\n";
}

}  // namespace

void print_ops_report(std::ostream& out, const BenchOpsReport& report) {
  out << "operation counts over a " << report.table_rows
      << "-row encrypted table\n\n";
  ops_table(out, report.measured);
  out << "\npublished 10-record reference (for comparison, not asserted):\n";
  ops_table(out, report.reference);
  out << "\nnote: counters include operations on trivial constant "
         "ciphertexts.\n";
}

void write_ops_csv(std::ostream& out, const BenchOpsReport& report) {
  out << "source,statement,total,additions,multiplications\n";
  for (const BenchOpsRow& row : report.measured)
    out << "measured," << row.label << "," << row.counters.total() << ","
        << row.counters.additions << "," << row.counters.multiplications
        << "\n";
  for (const BenchOpsRow& row : report.reference)
    out << "reference," << row.label << "," << row.counters.total() << ","
        << row.counters.additions << "," << row.counters.multiplications
        << "\n";
}

// --- Timing ----------------------------------------------------------------

BenchTimingReport bench_timing(const std::vector<unsigned>& lambdas,
                               const std::vector<unsigned>& widths,
                               unsigned reps) {
  using Clock = std::chrono::steady_clock;
  BenchTimingReport report;
  report.reps = reps;
  Rng rng(default_seed());

  for (unsigned lambda : lambdas) {
    std::optional<KeySet> recrypt_keys;  // widest key of this lambda
    for (unsigned width : widths) {
      SecurityParams probe{};
      probe.n_bits = lambda;
      const StatementEstimate est = estimate_product(probe, width);
      const SecurityParams params =
          SecurityParams::for_budget(lambda, est.out_noise);
      KeySet keys = keygen(params, rng);

      const uint64_t a = rng.below_u64(uint64_t{1} << width);
      const uint64_t b = rng.below_u64(uint64_t{1} << width);
      const EncryptedWord wa =
          encrypt_word(encode_uint_bits(a, width), keys, rng);
      const EncryptedWord wb =
          encrypt_word(encode_uint_bits(b, width), keys, rng);

      TimingCell cell;
      cell.lambda = lambda;
      cell.width = width;
      cell.seconds = std::numeric_limits<double>::infinity();
      Word<CipherEval> prod;
      for (unsigned r = 0; r < reps; ++r) {
        CipherEval ev(keys.ctx);
        const auto t0 = Clock::now();
        prod = product_circuit(ev, wa.bits, wb.bits);
        const auto t1 = Clock::now();
        cell.seconds = std::min(
            cell.seconds, std::chrono::duration<double>(t1 - t0).count());
        cell.counters = ev.counters;
      }
      EncryptedWord flat;
      flat.bits = std::move(prod);
      cell.verified = decrypt_uint_word(flat, keys.sk) == a * b;
      report.cells.push_back(std::move(cell));

      recrypt_keys = std::move(keys);
    }

    if (recrypt_keys) {
      Ciphertext ct = encrypt_bit(1, *recrypt_keys, rng);
      RecryptTiming rt;
      rt.lambda = lambda;
      rt.seconds = std::numeric_limits<double>::infinity();
      for (unsigned r = 0; r < reps; ++r) {
        OpCounters counters;
        const auto t0 = Clock::now();
        recrypt(ct, recrypt_keys->bk, &counters);
        const auto t1 = Clock::now();
        rt.seconds = std::min(
            rt.seconds, std::chrono::duration<double>(t1 - t0).count());
      }
      report.recrypts.push_back(rt);
    }
  }
  return report;
}

void print_timing_report(std::ostream& out, const BenchTimingReport& report) {
  out << "encrypted product wall time (best of " << report.reps << ")\n\n";
  out << std::left << std::setw(8) << "lambda" << std::setw(7) << "width"
      << std::right << std::setw(12) << "seconds" << std::setw(12)
      << "gate ops" << std::setw(10) << "verified" << "\n";
  out << std::left << std::setw(8) << "------" << std::setw(7) << "-----"
      << std::right << std::setw(12) << "-------" << std::setw(12)
      << "--------" << std::setw(10) << "--------" << "\n";
  for (const TimingCell& cell : report.cells)
    out << std::left << std::setw(8) << cell.lambda << std::setw(7)
        << cell.width << std::right << std::setw(12) << std::fixed
        << std::setprecision(6) << cell.seconds << std::setw(12)
        << cell.counters.total() << std::setw(10)
        << (cell.verified ? "yes" : "NO") << "\n";

  if (!report.recrypts.empty()) {
    out << "\nciphertext refresh (recrypt), best of " << report.reps
        << ":\n";
    for (const RecryptTiming& rt : report.recrypts)
      out << "  lambda " << rt.lambda << ": " << std::fixed
          << std::setprecision(6) << rt.seconds << " s\n";

    const double per_recrypt = report.recrypts.front().seconds;
    const double total = 619839.0 * per_recrypt;
    out << "\nretrieval extrapolation: the published 10-record SELECT "
           "needs 619839 gate operations; at one refresh per gate and "
        << std::setprecision(6) << per_recrypt
        << " s per refresh that is 619839 x " << per_recrypt << " s = "
        << std::setprecision(1) << total << " s (" << std::setprecision(3)
        << total / 86400.0 << " days) for one row.\n";
  }
  out << "\ncontext (published reference, not asserted): 23 minutes for a "
         "16-bit product and about 1 second per recrypt on the original "
         "1.7 GHz / 3 GB hardware; at 1 s per gate the published SELECT "
         "count is 619839 s, about 7.2 days per row.\n";
}

void write_timing_csv(std::ostream& out, const BenchTimingReport& report) {
  out << "kind,lambda,width,seconds,additions,multiplications,verified\n";
  for (const TimingCell& cell : report.cells)
    out << "product," << cell.lambda << "," << cell.width << ","
        << cell.seconds << "," << cell.counters.additions << ","
        << cell.counters.multiplications << ","
        << (cell.verified ? "yes" : "no") << "\n";
  for (const RecryptTiming& rt : report.recrypts)
    out << "recrypt," << rt.lambda << ",," << rt.seconds << ",,,\n";
}

}  // namespace hedb
