// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/oracle.hpp"

#include "hedb/error.hpp"

namespace hedb {

namespace {

// Cells are stored 0x00-padded to the column width; all comparisons are
// defined over the padded bytes.
std::string padded(const std::string& s, size_t chars) {
  std::string p = s;
  p.resize(chars, '\0');
  return p;
}

bool row_matches(const std::vector<PlainValue>& row, const ValidatedQuery& vq,
                 const ColumnSpec& col) {
  const PlainValue& cell = row[vq.column_index];
  const PlainValue& lit = vq.ast.pred.literal;
  switch (vq.op) {
    case PredOp::Eq:
      if (col.kind == ColumnKind::Uint) return cell.uint_value == lit.uint_value;
      return padded(cell.string_value, col.char_count()) ==
             padded(lit.string_value, col.char_count());
    case PredOp::Lt:
      if (col.kind == ColumnKind::Uint) return cell.uint_value < lit.uint_value;
      return padded(cell.string_value, col.char_count()) <
             padded(lit.string_value, col.char_count());
    case PredOp::Gt:
      if (col.kind == ColumnKind::Uint) return cell.uint_value > lit.uint_value;
      return padded(cell.string_value, col.char_count()) >
             padded(lit.string_value, col.char_count());
    case PredOp::Pattern: {
      const std::string bytes = padded(cell.string_value, col.char_count());
      const std::vector<uint8_t>& mask = vq.pattern.mask;
      for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && bytes[i] != vq.pattern_literals[i]) return false;
      if (!vq.pattern.prefix_only)
        for (size_t i = mask.size(); i < bytes.size(); ++i)
          if (bytes[i] != '\0') return false;
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<PlainValue> zero_row(const TableSchema& schema) {
  std::vector<PlainValue> row;
  row.reserve(schema.columns.size());
  for (const ColumnSpec& col : schema.columns)
    row.push_back(col.kind == ColumnKind::Uint ? PlainValue::of_uint(0)
                                               : PlainValue::of_string(""));
  return row;
}

bool plain_equal(const PlainValue& a, const PlainValue& b) {
  if (a.kind != b.kind) return false;
  return a.kind == ColumnKind::Uint ? a.uint_value == b.uint_value
                                    : a.string_value == b.string_value;
}

OracleResult oracle_execute(PlainTable& t, const QueryAst& ast, unsigned n) {
  const ValidatedQuery vq = validate_query(ast, t.schema);
  const ColumnSpec& col = t.schema.columns[vq.column_index];

  std::vector<char> match(t.rows.size(), 0);
  for (size_t i = 0; i < t.rows.size(); ++i)
    match[i] = row_matches(t.rows[i], vq, col) ? 1 : 0;

  OracleResult out;
  switch (ast.kind) {
    case StatementKind::Select: {
      out.row = zero_row(t.schema);
      unsigned seen = 0;
      for (size_t i = 0; i < t.rows.size(); ++i)
        if (match[i] && ++seen == n) {
          out.row = t.rows[i];
          break;
        }
      break;
    }
    case StatementKind::Update:
      for (size_t i = 0; i < t.rows.size(); ++i)
        if (match[i]) t.rows[i] = vq.update_values;
      break;
    case StatementKind::Delete:
      for (size_t i = 0; i < t.rows.size(); ++i)
        if (match[i]) t.rows[i] = zero_row(t.schema);
      break;
    case StatementKind::Count:
      for (char m : match) out.count += m;
      break;
    case StatementKind::Avg:
      for (size_t i = 0; i < t.rows.size(); ++i)
        if (match[i]) {
          out.sum += t.rows[i][vq.avg_column_index].uint_value;
          out.count += 1;
        }
      break;
  }
  return out;
}

}  // namespace hedb
