// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// The supported SQL subset: tokenizer, parser, canonical renderer, and the
// schema-aware validator that resolves columns and classifies wildcard
// patterns. Grammar (keywords case-insensitive, identifiers case-sensitive):
//
//   SELECT * FROM t WHERE pred
//   SELECT COUNT(*) FROM t WHERE pred
//   SELECT AVG(col) FROM t WHERE pred
//   UPDATE t SET col = lit [, col = lit]... WHERE pred
//   DELETE FROM t WHERE pred
//   pred := col (= | < | >) literal
//
// String literals are single-quoted. In an equality over a string column,
// '?' matches any single character and a final '*' matches any tail; there
// is exactly one predicate (no AND/OR).

#ifndef HEDB_SQL_HPP
#define HEDB_SQL_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "hedb/circuits.hpp"
#include "hedb/encoding.hpp"

namespace hedb {

struct SqlPredicate {
  std::string column;
  char op = '=';  // as written: '=', '<', '>'
  PlainValue literal;
  size_t column_offset = 0;
  size_t literal_offset = 0;
};

struct SqlAssignment {
  std::string column;
  PlainValue literal;
  size_t column_offset = 0;
  size_t literal_offset = 0;
};

struct QueryAst {
  StatementKind kind = StatementKind::Select;
  std::string table;
  SqlPredicate pred;
  std::vector<SqlAssignment> assignments;  // Update
  std::string target_column;               // Avg
  size_t table_offset = 0;
};

// Throws Error(SyntaxError) with the byte offset of the offending token,
// or Error(UnsupportedFeature) for constructs outside the subset (AND/OR,
// JOIN, column projections, ...).
QueryAst parse_query(const std::string& text);

// Canonical rendering; parse_query(render_query(ast)) reproduces ast.
std::string render_query(const QueryAst& ast);

// The parse result bound to a schema: resolved column indexes, the
// operator as the circuits see it (wildcard equalities become Pattern),
// and update assignments arranged in schema column order.
struct ValidatedQuery {
  QueryAst ast;
  size_t column_index = 0;
  PredOp op = PredOp::Eq;
  PatternSpec pattern;            // op == Pattern
  std::string pattern_literals;   // literal chars; 0x00 at '?' positions
  size_t avg_column_index = 0;
  std::vector<PlainValue> update_values;  // schema order (Update)
};

// Throws UnknownTable / UnknownColumn / TypeMismatch / ValueOverflow /
// BadPattern / PatternTooLong / PartialUpdateUnsupported /
// UnsupportedFeature.
ValidatedQuery validate_query(const QueryAst& ast, const TableSchema& schema);

}  // namespace hedb

#endif  // HEDB_SQL_HPP
