// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Pre-execution noise and operation-count estimates. Each estimate walks
// the very circuit template the server will execute, with a noise-replay
// evaluator in place of ciphertexts, so the numbers match the real run
// gate for gate. Clients use this to size keys at keygen time and to
// refuse queries whose results could not be decrypted.

#ifndef HEDB_ESTIMATE_HPP
#define HEDB_ESTIMATE_HPP

#include "hedb/circuits.hpp"
#include "hedb/params.hpp"

namespace hedb {

// Shape of one statement: row count and widths, never data.
struct StatementShape {
  StatementKind kind = StatementKind::Select;
  PredOp op = PredOp::Eq;
  unsigned rows = 0;
  unsigned operand_bits = 0;      // predicate column width
  unsigned record_bits = 0;       // full record width
  unsigned avg_bits = 0;          // Avg target column width
  unsigned pattern_chars = 0;     // Pattern: mask length
  unsigned pattern_literals = 0;  // Pattern: literal (non-'?') positions
  bool prefix_only = false;       // Pattern: trailing '*'
  uint32_t cell_noise = 0;        // stored-cell noise (0 = fresh)
};

struct StatementEstimate {
  uint32_t out_noise = 0;  // max noise over every result bit
  OpCounters counters;
};

StatementEstimate estimate_statement(const SecurityParams& params,
                                     const StatementShape& shape);

// The workload a default key promises to cover: a full-capacity table
// with predicates up to 32 bits, records up to 256 bits, and aggregate
// targets up to 8 bits, all over freshly inserted rows.
struct WorkloadEnvelope {
  unsigned rows = kMaxRows;
  unsigned operand_bits = 32;
  unsigned record_bits = 256;
  unsigned avg_bits = 8;
};

// Worst out_noise over every statement kind and operator within the
// envelope. A key with p_bits >= this + 2 decrypts every such query.
uint32_t workload_noise(unsigned n_bits, const WorkloadEnvelope& env = {});

// Noise estimate of the two-operand product benchmark at width w.
StatementEstimate estimate_product(const SecurityParams& params, unsigned w);

}  // namespace hedb

#endif  // HEDB_ESTIMATE_HPP
