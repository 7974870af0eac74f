// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/table.hpp"

#include <cstring>

#include "hedb/bytes.hpp"
#include "hedb/error.hpp"

namespace hedb {

namespace {

constexpr char kTableMagic[] = "HEDB-TBL v1";
constexpr size_t kTableMagicLen = sizeof(kTableMagic) - 1;

void check_record_shape(const TableSchema& schema, const EncryptedRecord& rec) {
  if (rec.words.size() != schema.columns.size())
    throw Error(ErrorCode::WidthMismatch,
                "record has " + std::to_string(rec.words.size()) +
                    " words for a " + std::to_string(schema.columns.size()) +
                    "-column schema");
  for (size_t i = 0; i < rec.words.size(); ++i)
    if (rec.words[i].width() != schema.columns[i].bit_width)
      throw Error(ErrorCode::WidthMismatch,
                  "word width does not match column '" +
                      schema.columns[i].name + "'");
}

}  // namespace

EncryptedWord encrypt_word(const std::vector<uint8_t>& bits,
                           const KeySet& keys, Rng& rng) {
  EncryptedWord w;
  w.bits.reserve(bits.size());
  for (uint8_t b : bits) w.bits.push_back(encrypt_bit(b, keys, rng));
  return w;
}

std::vector<uint8_t> decrypt_word_bits(const EncryptedWord& w,
                                       const SecretKey& sk) {
  std::vector<uint8_t> bits;
  bits.reserve(w.bits.size());
  for (const Ciphertext& ct : w.bits)
    bits.push_back(static_cast<uint8_t>(decrypt_bit(ct, sk)));
  return bits;
}

EncryptedWord encode_word(const PlainValue& v, const ColumnSpec& spec,
                          const KeySet& keys, Rng& rng) {
  return encrypt_word(encode_value_bits(v, spec), keys, rng);
}

PlainValue decode_word(const EncryptedWord& w, const ColumnSpec& spec,
                       const SecretKey& sk) {
  return decode_value_bits(decrypt_word_bits(w, sk), spec);
}

EncryptedRecord encrypt_record(const std::vector<PlainValue>& values,
                               const TableSchema& schema, const KeySet& keys,
                               Rng& rng) {
  if (values.size() != schema.columns.size())
    throw Error(ErrorCode::SchemaMismatch,
                "expected " + std::to_string(schema.columns.size()) +
                    " values, got " + std::to_string(values.size()));
  EncryptedRecord rec;
  rec.words.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i)
    rec.words.push_back(encode_word(values[i], schema.columns[i], keys, rng));
  return rec;
}

std::vector<PlainValue> decrypt_record(const EncryptedRecord& rec,
                                       const TableSchema& schema,
                                       const SecretKey& sk) {
  check_record_shape(schema, rec);
  std::vector<PlainValue> values;
  values.reserve(rec.words.size());
  for (size_t i = 0; i < rec.words.size(); ++i)
    values.push_back(decode_word(rec.words[i], schema.columns[i], sk));
  return values;
}

void append_row(EncryptedTable& table, EncryptedRecord rec) {
  check_record_shape(table.schema, rec);
  if (table.rows.size() >= kMaxRows)
    throw Error(ErrorCode::RowLimitExceeded,
                "table '" + table.schema.table_name +
                    "' is at its capacity of " + std::to_string(kMaxRows) +
                    " rows");
  table.rows.push_back(std::move(rec));
}

std::vector<uint8_t> serialize_table(const EncryptedTable& t) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kTableMagic, kTableMagic + kTableMagicLen);
  serialize_schema_block(t.schema, out);
  put_u32(out, static_cast<uint32_t>(t.rows.size()));
  for (const EncryptedRecord& rec : t.rows)
    for (const EncryptedWord& w : rec.words)
      for (const Ciphertext& ct : w.bits) serialize_ciphertext(ct, out);
  return out;
}

EncryptedTable parse_table(const uint8_t* data, size_t len,
                           const std::string& table_name, const CtxPtr& ctx,
                           uint32_t noise_bits, const TableSchema* expect) {
  if (len < kTableMagicLen ||
      std::memcmp(data, kTableMagic, kTableMagicLen) != 0)
    throw Error(ErrorCode::MalformedHeader, "not a table stream (bad magic)");

  EncryptedTable t;
  t.ctx = ctx;
  t.schema.table_name = table_name;
  size_t pos = parse_schema_block(data, len, kTableMagicLen, t.schema);
  t.schema.validate();
  if (expect && expect->columns != t.schema.columns)
    throw Error(ErrorCode::SchemaMismatch,
                "stored schema does not match the expected schema for '" +
                    table_name + "'");

  ByteReader r{data, len, pos};
  uint32_t row_count = r.u32();
  pos = r.pos;
  const unsigned rec_bits = t.schema.record_bits();
  t.rows.reserve(row_count);
  for (uint32_t i = 0; i < row_count; ++i) {
    EncryptedRecord rec;
    rec.words.resize(t.schema.columns.size());
    size_t col = 0;
    unsigned in_col = 0;
    for (unsigned b = 0; b < rec_bits; ++b) {
      Ciphertext ct;
      pos = parse_ciphertext(data, len, pos, ctx, noise_bits, ct);
      rec.words[col].bits.push_back(std::move(ct));
      if (++in_col == t.schema.columns[col].bit_width) {
        ++col;
        in_col = 0;
      }
    }
    t.rows.push_back(std::move(rec));
  }
  if (pos != len)
    throw Error(ErrorCode::MalformedHeader,
                "trailing bytes after the final row", pos);
  return t;
}

}  // namespace hedb
