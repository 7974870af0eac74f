// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Framed wire protocol. Every message is
//
//   "HEDB" | version 0x01 | msg type (u8) | payload length (u32 BE) | payload
//
// and every payload integer is big-endian. Other than framing and shape
// metadata (names, widths, operators, pattern masks), everything a client
// sends is ciphertext bytes: no query literal or cell value ever crosses
// the wire in the clear.

#ifndef HEDB_WIRE_HPP
#define HEDB_WIRE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hedb/circuits.hpp"
#include "hedb/he.hpp"
#include "hedb/sql.hpp"
#include "hedb/table.hpp"

namespace hedb {

enum class MsgType : uint8_t {
  CreateTable = 1,
  InsertRow = 2,
  Query = 3,
  Result = 4,
  Counters = 5,
  ErrorReply = 6,
  Ping = 7,
};

inline constexpr size_t kFrameHeaderSize = 10;
inline constexpr uint8_t kWireVersion = 0x01;

struct FrameHeader {
  MsgType type = MsgType::Ping;
  uint32_t length = 0;
};

// Throws MalformedFrame / UnsupportedVersion / UnknownMessageType.
FrameHeader parse_frame_header(const uint8_t* data);

std::vector<uint8_t> build_frame(MsgType type,
                                 const std::vector<uint8_t>& payload);

// --- Compiled queries ------------------------------------------------------

// The plaintext part of a compiled query: structure only, never values.
struct CompiledShape {
  StatementKind kind = StatementKind::Select;
  std::string table;
  std::string column;           // predicate column
  PredOp op = PredOp::Eq;
  uint16_t operand_bits = 0;
  uint16_t eta_bits = 0;        // Select
  uint16_t u_bits = 0;          // Update
  PatternSpec pattern;          // op == Pattern
  std::string avg_column;       // Avg

  bool operator==(const CompiledShape&) const = default;
};

struct CompiledQuery {
  CompiledShape shape;
  EncryptedWord operand;   // predicate value / pattern literal characters
  EncryptedWord eta;       // Select: which match (1-based)
  EncryptedWord update_u;  // Update: full replacement record
};

// Encrypt a validated query's parameters. n is the SELECT match ordinal.
CompiledQuery compile_query(const ValidatedQuery& q, const TableSchema& schema,
                            unsigned n, const KeySet& keys, Rng& rng);

// Binds a compiled query to a concrete schema for execution, resolving
// column names to indexes. Throws UnknownColumn.
StatementInput to_statement_input(CompiledQuery q, const TableSchema& schema);

// --- Payload codecs --------------------------------------------------------

// CREATE_TABLE: name, schema block, then the evaluation context (parameters,
// x0, y) the server will attach to every ciphertext of this table.
struct CreateTableMsg {
  TableSchema schema;  // table_name filled from the payload
  SecurityParams params;
  mpz_class x0;
  std::vector<mpz_class> y;
};

std::vector<uint8_t> build_create_table(const TableSchema& schema,
                                        const CipherContext& ctx);
CreateTableMsg parse_create_table(const std::vector<uint8_t>& payload);

// INSERT_ROW: name, then one ciphertext per record bit in schema order.
std::vector<uint8_t> build_insert_row(const std::string& table,
                                      const EncryptedRecord& rec);
// Phase 1 returns the table name and the ciphertext offset; phase 2 needs
// the table's schema and context.
size_t parse_insert_row_name(const std::vector<uint8_t>& payload,
                             std::string& table);
EncryptedRecord parse_insert_row(const std::vector<uint8_t>& payload,
                                 size_t pos, const TableSchema& schema,
                                 const CtxPtr& ctx, uint32_t noise_bits);

// QUERY: shape block, then operand / eta / U ciphertexts in that order.
std::vector<uint8_t> build_query(const CompiledQuery& q);
size_t parse_query_shape(const std::vector<uint8_t>& payload,
                         CompiledShape& shape);
void parse_query_operands(const std::vector<uint8_t>& payload, size_t pos,
                          const CompiledShape& shape, const CtxPtr& ctx,
                          uint32_t noise_bits, CompiledQuery& out);

// RESULT: ciphertext count, then the ciphertexts.
std::vector<uint8_t> build_result(const std::vector<Ciphertext>& cts);
std::vector<Ciphertext> parse_result(const std::vector<uint8_t>& payload,
                                     const CtxPtr& ctx, uint32_t noise_bits);

// COUNTERS: additions, multiplications, recrypts as u64s.
std::vector<uint8_t> build_counters(const OpCounters& counters);
OpCounters parse_counters(const std::vector<uint8_t>& payload);

// ERROR: stable numeric code + message.
struct WireError {
  ErrorCode code = ErrorCode::Internal;
  std::string message;
};
std::vector<uint8_t> build_error(ErrorCode code, const std::string& message);
WireError parse_error(const std::vector<uint8_t>& payload);

}  // namespace hedb

#endif  // HEDB_WIRE_HPP
