// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/circuits.hpp"

namespace hedb {

const char* statement_kind_name(StatementKind kind) {
  switch (kind) {
    case StatementKind::Select: return "SELECT";
    case StatementKind::Update: return "UPDATE";
    case StatementKind::Delete: return "DELETE";
    case StatementKind::Count: return "COUNT";
    case StatementKind::Avg: return "AVG";
  }
  return "?";
}

const char* pred_op_name(PredOp op) {
  switch (op) {
    case PredOp::Eq: return "=";
    case PredOp::Lt: return "<";
    case PredOp::Gt: return ">";
    case PredOp::Pattern: return "pattern";
  }
  return "?";
}

std::vector<unsigned> significance_order(const ColumnSpec& spec) {
  std::vector<unsigned> order;
  order.reserve(spec.bit_width);
  if (spec.kind == ColumnKind::Uint) {
    for (unsigned i = spec.bit_width; i-- > 0;) order.push_back(i);
  } else {
    // Lexicographic by byte: leftmost character decides first, and within
    // a byte its high bit decides first.
    for (unsigned byte = 0; byte < spec.char_count(); ++byte)
      for (unsigned k = 8; k-- > 0;) order.push_back(8 * byte + k);
  }
  return order;
}

unsigned sum_result_width(unsigned target_bits) {
  const unsigned long total =
      ((1ul << kCounterBits) - 1) * ((1ul << target_bits) - 1);
  unsigned w = 0;
  while ((1ul << w) <= total) ++w;
  return w > kCounterBits ? w : kCounterBits;
}

CipherEval::Bit CipherEval::add(const Bit& a, const Bit& b) {
  Bit r = he_add(a, b);
  const uint64_t index = counters.additions++;
  if (index == fault_add_index)
    mpz_combit(r.c.get_mpz_t(), 0);  // flip the carried parity
  return after(std::move(r));
}

CipherEval::Bit CipherEval::mul(const Bit& a, const Bit& b) {
  Bit r = he_mul(a, b);
  ++counters.multiplications;
  return after(std::move(r));
}

CipherEval::Bit CipherEval::triv(int m) { return trivial_bit(m, ctx_); }

CipherEval::Bit CipherEval::after(Bit r) {
  if (refresh_key && refresh_threshold && r.noise_bits >= refresh_threshold &&
      !r.noise_exceeded())
    r = recrypt(r, *refresh_key, &counters);
  return r;
}

namespace {

std::vector<std::vector<Ciphertext>> column_bits(const EncryptedTable& t,
                                                 size_t col) {
  std::vector<std::vector<Ciphertext>> out;
  out.reserve(t.rows.size());
  for (const EncryptedRecord& rec : t.rows) out.push_back(rec.words[col].bits);
  return out;
}

PredicateInput<CipherEval> predicate_of(const EncryptedTable& table,
                                        const StatementInput& in) {
  const ColumnSpec& col = table.schema.columns[in.column_index];
  PredicateInput<CipherEval> pred;
  pred.op = in.op;
  pred.operand = in.operand.bits;
  if (in.op == PredOp::Lt || in.op == PredOp::Gt)
    pred.sig_order = significance_order(col);
  if (in.op == PredOp::Pattern) pred.pattern = in.pattern;
  return pred;
}

void check_shapes(const EncryptedTable& table, const StatementInput& in) {
  const TableSchema& schema = table.schema;
  if (in.column_index >= schema.columns.size())
    throw Error(ErrorCode::ShapeMismatch, "predicate column out of range");
  const ColumnSpec& col = schema.columns[in.column_index];

  if (in.op == PredOp::Pattern) {
    if (col.kind != ColumnKind::String)
      throw Error(ErrorCode::ShapeMismatch,
                  "pattern predicate on a non-string column");
    if (in.pattern.mask.size() > col.char_count())
      throw Error(ErrorCode::ShapeMismatch,
                  "pattern longer than the column");
    if (in.operand.width() != 8 * in.pattern.mask.size())
      throw Error(ErrorCode::ShapeMismatch,
                  "pattern literal width does not match its mask");
  } else {
    if (in.operand.width() != col.bit_width)
      throw Error(ErrorCode::ShapeMismatch,
                  "operand width does not match the column");
  }

  switch (in.kind) {
    case StatementKind::Select:
      if (in.eta.width() != eta_width(schema.record_bits()))
        throw Error(ErrorCode::ShapeMismatch,
                    "match-ordinal width does not fit the schema");
      break;
    case StatementKind::Update:
      if (in.replacement.width() != schema.record_bits())
        throw Error(ErrorCode::ShapeMismatch,
                    "replacement record width does not match the schema");
      break;
    case StatementKind::Avg: {
      if (in.avg_column_index >= schema.columns.size())
        throw Error(ErrorCode::ShapeMismatch, "aggregate column out of range");
      const ColumnSpec& target = schema.columns[in.avg_column_index];
      if (target.kind != ColumnKind::Uint)
        throw Error(ErrorCode::ShapeMismatch,
                    "aggregate over a non-numeric column");
      if (target.bit_width > 32)
        throw Error(ErrorCode::ShapeMismatch,
                    "aggregate target wider than 32 bits");
      break;
    }
    case StatementKind::Delete:
    case StatementKind::Count:
      break;
  }
}

}  // namespace

std::vector<std::vector<Ciphertext>> column_words(const EncryptedTable& t,
                                                  size_t col) {
  return column_bits(t, col);
}

std::vector<std::vector<Ciphertext>> flattened_rows(const EncryptedTable& t) {
  std::vector<std::vector<Ciphertext>> out;
  out.reserve(t.rows.size());
  for (const EncryptedRecord& rec : t.rows) {
    std::vector<Ciphertext> flat;
    flat.reserve(t.schema.record_bits());
    for (const EncryptedWord& w : rec.words)
      flat.insert(flat.end(), w.bits.begin(), w.bits.end());
    out.push_back(std::move(flat));
  }
  return out;
}

EncryptedRecord record_from_flat(std::vector<Ciphertext> bits,
                                 const TableSchema& schema) {
  EncryptedRecord rec;
  rec.words.reserve(schema.columns.size());
  size_t pos = 0;
  for (const ColumnSpec& col : schema.columns) {
    EncryptedWord w;
    w.bits.reserve(col.bit_width);
    for (unsigned j = 0; j < col.bit_width; ++j)
      w.bits.push_back(std::move(bits[pos++]));
    rec.words.push_back(std::move(w));
  }
  return rec;
}

ExecResult execute_statement(const EncryptedTable& table,
                             const StatementInput& input,
                             const ExecOptions& opts) {
  check_shapes(table, input);
  CipherEval ev(table.ctx);
  ev.refresh_key = opts.refresh_key;
  ev.refresh_threshold = opts.refresh_threshold;
  ev.fault_add_index = opts.fault_add_index;

  const auto cols = column_bits(table, input.column_index);
  const PredicateInput<CipherEval> pred = predicate_of(table, input);
  ExecResult out;

  switch (input.kind) {
    case StatementKind::Select: {
      out.record.bits =
          select_nth_circuit(ev, cols, flattened_rows(table),
                             table.schema.record_bits(), pred, input.eta.bits);
      break;
    }
    case StatementKind::Update: {
      auto rows = update_circuit(ev, cols, flattened_rows(table), pred,
                                 input.replacement.bits);
      out.new_rows.reserve(rows.size());
      for (auto& flat : rows)
        out.new_rows.push_back(record_from_flat(std::move(flat), table.schema));
      break;
    }
    case StatementKind::Delete: {
      auto rows = delete_circuit(ev, cols, flattened_rows(table), pred);
      out.new_rows.reserve(rows.size());
      for (auto& flat : rows)
        out.new_rows.push_back(record_from_flat(std::move(flat), table.schema));
      break;
    }
    case StatementKind::Count: {
      out.count.bits = count_circuit(ev, cols, pred);
      break;
    }
    case StatementKind::Avg: {
      auto targets = column_bits(table, input.avg_column_index);
      auto words = avg_circuit(
          ev, cols, targets, table.schema.columns[input.avg_column_index].bit_width,
          pred);
      out.sum.bits = std::move(words.sum);
      out.count.bits = std::move(words.count);
      break;
    }
  }
  out.counters = ev.counters;
  return out;
}

}  // namespace hedb
