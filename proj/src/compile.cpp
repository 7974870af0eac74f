// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Turns a validated statement into the encrypted payload a server can
// evaluate blindly: every literal the client typed is encrypted bit by bit,
// so only the statement's shape (kind, column names, operand widths) travels
// in the clear.

#include "hedb/wire.hpp"

#include "hedb/error.hpp"

namespace hedb {

namespace {

// Bits of a raw byte string, each byte least-significant bit first. Unlike
// data strings, pattern literals may contain 0x00 at '?' positions.
std::vector<uint8_t> byte_string_bits(const std::string& s) {
  std::vector<uint8_t> bits;
  bits.reserve(8 * s.size());
  for (char c : s) {
    const auto byte = static_cast<uint8_t>(c);
    for (unsigned k = 0; k < 8; ++k)
      bits.push_back(static_cast<uint8_t>((byte >> k) & 1u));
  }
  return bits;
}

}  // namespace

CompiledQuery compile_query(const ValidatedQuery& q, const TableSchema& schema,
                            unsigned n, const KeySet& keys, Rng& rng) {
  CompiledQuery out;
  out.shape.kind = q.ast.kind;
  out.shape.table = q.ast.table;
  out.shape.column = q.ast.pred.column;
  out.shape.op = q.op;

  const ColumnSpec& col = schema.columns[q.column_index];
  std::vector<uint8_t> operand_bits;
  if (q.op == PredOp::Pattern) {
    out.shape.pattern = q.pattern;
    operand_bits = byte_string_bits(q.pattern_literals);
  } else {
    operand_bits = encode_value_bits(q.ast.pred.literal, col);
  }
  out.shape.operand_bits = static_cast<uint16_t>(operand_bits.size());
  out.operand = encrypt_word(operand_bits, keys, rng);

  if (q.ast.kind == StatementKind::Select) {
    const unsigned w = eta_width(schema.record_bits());
    out.shape.eta_bits = static_cast<uint16_t>(w);
    out.eta = encrypt_word(encode_uint_bits(n, w), keys, rng);
  }
  if (q.ast.kind == StatementKind::Update) {
    std::vector<uint8_t> u_bits;
    u_bits.reserve(schema.record_bits());
    for (size_t i = 0; i < schema.columns.size(); ++i) {
      std::vector<uint8_t> bits =
          encode_value_bits(q.update_values[i], schema.columns[i]);
      u_bits.insert(u_bits.end(), bits.begin(), bits.end());
    }
    out.shape.u_bits = static_cast<uint16_t>(u_bits.size());
    out.update_u = encrypt_word(u_bits, keys, rng);
  }
  if (q.ast.kind == StatementKind::Avg)
    out.shape.avg_column = q.ast.target_column;
  return out;
}

StatementInput to_statement_input(CompiledQuery q, const TableSchema& schema) {
  StatementInput in;
  in.kind = q.shape.kind;
  in.op = q.shape.op;
  const int ci = schema.column_index(q.shape.column);
  if (ci < 0)
    throw Error(ErrorCode::UnknownColumn,
                "unknown column '" + q.shape.column + "' in table '" +
                    schema.table_name + "'");
  in.column_index = static_cast<size_t>(ci);
  in.operand = std::move(q.operand);
  in.pattern = q.shape.pattern;
  in.eta = std::move(q.eta);
  in.replacement = std::move(q.update_u);
  if (q.shape.kind == StatementKind::Avg) {
    const int ti = schema.column_index(q.shape.avg_column);
    if (ti < 0)
      throw Error(ErrorCode::UnknownColumn,
                  "unknown column '" + q.shape.avg_column + "' in table '" +
                      schema.table_name + "'");
    in.avg_column_index = static_cast<size_t>(ti);
  }
  return in;
}

}  // namespace hedb
