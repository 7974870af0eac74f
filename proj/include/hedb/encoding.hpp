// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Plaintext-side data model: column/table schemas, the fixed-width bit
// encodings of values, and the schema text/binary formats. Everything here
// is key-free; encryption of encoded bits lives in table.hpp.

#ifndef HEDB_ENCODING_HPP
#define HEDB_ENCODING_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hedb {

enum class ColumnKind : uint8_t {
  Uint = 0x01,
  String = 0x02,
};

const char* column_kind_name(ColumnKind kind);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Uint;
  uint16_t bit_width = 0;

  // For string columns: maximum character count.
  unsigned char_count() const { return bit_width / 8u; }
  bool operator==(const ColumnSpec&) const = default;
};

struct TableSchema {
  std::string table_name;
  std::vector<ColumnSpec> columns;

  unsigned record_bits() const;
  // Bit offset of column idx within a record (columns are concatenated in
  // schema order, each word LSB-first).
  unsigned column_offset(size_t idx) const;
  // Index of the named column, or -1.
  int column_index(std::string_view name) const;
  // Throws Error(InvalidSchema) when any structural rule is violated.
  void validate() const;
  bool operator==(const TableSchema&) const = default;
};

// True for [A-Za-z_][A-Za-z0-9_]* of length 1..255.
bool is_identifier(std::string_view s);

// --- Plaintext bit encodings (LSB-first) ---------------------------------
//
// uint: little-endian binary expansion over bit_width bits.
// string: bytes in order, each byte LSB-first, right-padded with 0x00 to
// bit_width. NUL is banned in data so padding is unambiguous.

std::vector<uint8_t> encode_uint_bits(uint64_t value, unsigned bit_width);
std::vector<uint8_t> encode_string_bits(const std::string& value,
                                        unsigned bit_width);
uint64_t decode_uint_bits(const std::vector<uint8_t>& bits);
std::string decode_string_bits(const std::vector<uint8_t>& bits);

// A typed literal (query operand, inserted cell, or decoded cell).
struct PlainValue {
  ColumnKind kind = ColumnKind::Uint;
  uint64_t uint_value = 0;
  std::string string_value;

  static PlainValue of_uint(uint64_t v);
  static PlainValue of_string(std::string v);
  bool operator==(const PlainValue&) const = default;
  // Human-readable rendering ("42" or the raw string).
  std::string display() const;
};

std::vector<uint8_t> encode_value_bits(const PlainValue& v,
                                       const ColumnSpec& spec);
PlainValue decode_value_bits(const std::vector<uint8_t>& bits,
                             const ColumnSpec& spec);

// --- Schema text format ---------------------------------------------------
//
// One column per line: "name:kind:bits" with kind in {uint,string}. Blank
// lines and lines starting with '#' are skipped.
TableSchema parse_schema_text(const std::string& text,
                              const std::string& table_name);
std::string schema_to_text(const TableSchema& schema);

// --- Schema binary block --------------------------------------------------
//
// column count (u8), then per column: name length (u8) + name bytes, kind
// byte (0x01 uint / 0x02 string), bit_width (u16 big-endian). Shared by the
// table file format and the wire protocol; carries no table name.
void serialize_schema_block(const TableSchema& schema,
                            std::vector<uint8_t>& out);
size_t parse_schema_block(const uint8_t* data, size_t len, size_t pos,
                          TableSchema& out);

}  // namespace hedb

#endif  // HEDB_ENCODING_HPP
