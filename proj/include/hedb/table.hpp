// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Encrypted storage model: words (one per column), records, and tables,
// plus the on-disk table format. A table's shape — schema, row count, row
// order — is public; only cell contents are encrypted, bit by bit.

#ifndef HEDB_TABLE_HPP
#define HEDB_TABLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hedb/encoding.hpp"
#include "hedb/he.hpp"

namespace hedb {

// Fixed-width vector of encrypted bits, least-significant first.
struct EncryptedWord {
  std::vector<Ciphertext> bits;

  unsigned width() const { return static_cast<unsigned>(bits.size()); }
};

// One row: one word per schema column, in schema order.
struct EncryptedRecord {
  std::vector<EncryptedWord> words;
};

struct EncryptedTable {
  TableSchema schema;
  std::vector<EncryptedRecord> rows;
  CtxPtr ctx;
};

// --- Cell encryption / decryption ----------------------------------------

EncryptedWord encrypt_word(const std::vector<uint8_t>& bits,
                           const KeySet& keys, Rng& rng);
std::vector<uint8_t> decrypt_word_bits(const EncryptedWord& w,
                                       const SecretKey& sk);

// encode_value_bits + encrypt_word / decrypt + decode_value_bits.
EncryptedWord encode_word(const PlainValue& v, const ColumnSpec& spec,
                          const KeySet& keys, Rng& rng);
PlainValue decode_word(const EncryptedWord& w, const ColumnSpec& spec,
                       const SecretKey& sk);

EncryptedRecord encrypt_record(const std::vector<PlainValue>& values,
                               const TableSchema& schema, const KeySet& keys,
                               Rng& rng);
std::vector<PlainValue> decrypt_record(const EncryptedRecord& rec,
                                       const TableSchema& schema,
                                       const SecretKey& sk);

// Appends after checking the record's widths against the schema and the
// table's capacity (kMaxRows). Throws WidthMismatch / RowLimitExceeded.
void append_row(EncryptedTable& table, EncryptedRecord rec);

// --- Table file format ----------------------------------------------------
//
// magic "HEDB-TBL v1" (ASCII), schema block, row count (u32 big-endian),
// then rows as consecutive ciphertexts in schema bit order.

std::vector<uint8_t> serialize_table(const EncryptedTable& t);

// Parses a table stream. Cell noise estimates are not part of the format;
// every parsed cell is stamped with noise_bits (callers track a per-table
// watermark externally). When expect is given, the parsed schema must match
// its columns exactly (SchemaMismatch otherwise).
EncryptedTable parse_table(const uint8_t* data, size_t len,
                           const std::string& table_name, const CtxPtr& ctx,
                           uint32_t noise_bits,
                           const TableSchema* expect = nullptr);

}  // namespace hedb

#endif  // HEDB_TABLE_HPP
