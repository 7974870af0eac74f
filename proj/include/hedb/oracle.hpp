// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Plaintext reference semantics for every statement kind, written directly
// over plain values with no shared code with the encrypted evaluator. The
// differential harness runs both and demands exact equality.

#ifndef HEDB_ORACLE_HPP
#define HEDB_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "hedb/sql.hpp"

namespace hedb {

struct PlainTable {
  TableSchema schema;
  std::vector<std::vector<PlainValue>> rows;
};

// The all-zeros record: 0 for uints, "" for strings. Deleted rows and
// missing SELECT matches both take this value.
std::vector<PlainValue> zero_row(const TableSchema& schema);

bool plain_equal(const PlainValue& a, const PlainValue& b);

struct OracleResult {
  std::vector<PlainValue> row;  // Select: the n-th match or the zero row
  uint64_t count = 0;           // Count and Avg
  uint64_t sum = 0;             // Avg
};

// Validates the statement like the SQL front end, then applies reference
// semantics: 1-based n-th match in storage order, all-match UPDATE,
// DELETE to zeros, padded lexicographic string comparison, '?' matching
// any character (padding included) and a final '*' freeing the tail.
// Mutates t for UPDATE and DELETE.
OracleResult oracle_execute(PlainTable& t, const QueryAst& ast, unsigned n);

}  // namespace hedb

#endif  // HEDB_ORACLE_HPP
