// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/encoding.hpp"

#include <sstream>

#include "hedb/bytes.hpp"
#include "hedb/error.hpp"

namespace hedb {

namespace {

constexpr unsigned kMaxRecordBits = 4096;

bool ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

void check_column(const ColumnSpec& col) {
  if (!is_identifier(col.name))
    throw Error(ErrorCode::InvalidSchema,
                "column name is not a valid identifier: '" + col.name + "'");
  if (col.bit_width == 0)
    throw Error(ErrorCode::InvalidSchema,
                "column '" + col.name + "' has zero width");
  switch (col.kind) {
    case ColumnKind::Uint:
      if (col.bit_width > 64)
        throw Error(ErrorCode::InvalidSchema,
                    "uint column '" + col.name + "' wider than 64 bits");
      break;
    case ColumnKind::String:
      if (col.bit_width % 8 != 0)
        throw Error(ErrorCode::InvalidSchema,
                    "string column '" + col.name +
                        "' width must be a multiple of 8");
      break;
    default:
      throw Error(ErrorCode::InvalidSchema,
                  "column '" + col.name + "' has an unknown kind");
  }
}

}  // namespace

const char* column_kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Uint: return "uint";
    case ColumnKind::String: return "string";
  }
  return "?";
}

unsigned TableSchema::record_bits() const {
  unsigned total = 0;
  for (const ColumnSpec& c : columns) total += c.bit_width;
  return total;
}

unsigned TableSchema::column_offset(size_t idx) const {
  unsigned off = 0;
  for (size_t i = 0; i < idx && i < columns.size(); ++i)
    off += columns[i].bit_width;
  return off;
}

int TableSchema::column_index(std::string_view name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<int>(i);
  return -1;
}

void TableSchema::validate() const {
  if (!is_identifier(table_name))
    throw Error(ErrorCode::InvalidSchema,
                "table name is not a valid identifier: '" + table_name + "'");
  if (columns.empty())
    throw Error(ErrorCode::InvalidSchema, "schema has no columns");
  for (size_t i = 0; i < columns.size(); ++i) {
    check_column(columns[i]);
    for (size_t j = 0; j < i; ++j)
      if (columns[j].name == columns[i].name)
        throw Error(ErrorCode::InvalidSchema,
                    "duplicate column name: '" + columns[i].name + "'");
  }
  if (record_bits() > kMaxRecordBits)
    throw Error(ErrorCode::InvalidSchema, "record exceeds " +
                                              std::to_string(kMaxRecordBits) +
                                              " bits");
}

bool is_identifier(std::string_view s) {
  if (s.empty() || s.size() > 255 || !ident_start(s[0])) return false;
  for (char c : s)
    if (!ident_char(c)) return false;
  return true;
}

std::vector<uint8_t> encode_uint_bits(uint64_t value, unsigned bit_width) {
  if (bit_width < 64 && value >> bit_width)
    throw Error(ErrorCode::ValueOverflow,
                std::to_string(value) + " does not fit in " +
                    std::to_string(bit_width) + " bits");
  // Words can be wider than the 64-bit value (a match ordinal is encoded at
  // the record width); positions past bit 63 are zero, and shifting by them
  // would be undefined.
  std::vector<uint8_t> bits(bit_width);
  const unsigned top = bit_width < 64 ? bit_width : 64;
  for (unsigned i = 0; i < top; ++i)
    bits[i] = static_cast<uint8_t>((value >> i) & 1u);
  return bits;
}

std::vector<uint8_t> encode_string_bits(const std::string& value,
                                        unsigned bit_width) {
  const unsigned max_chars = bit_width / 8u;
  if (value.size() > max_chars)
    throw Error(ErrorCode::ValueOverflow,
                "string of " + std::to_string(value.size()) +
                    " characters does not fit in " +
                    std::to_string(max_chars) + " (" +
                    std::to_string(bit_width) + " bits)");
  std::vector<uint8_t> bits(bit_width, 0);
  for (size_t b = 0; b < value.size(); ++b) {
    const auto byte = static_cast<uint8_t>(value[b]);
    if (byte == 0)
      throw Error(ErrorCode::InvalidCharacter,
                  "NUL character in string value");
    for (unsigned i = 0; i < 8; ++i)
      bits[8 * b + i] = static_cast<uint8_t>((byte >> i) & 1u);
  }
  return bits;
}

uint64_t decode_uint_bits(const std::vector<uint8_t>& bits) {
  uint64_t value = 0;
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) value |= uint64_t{1} << i;
  return value;
}

std::string decode_string_bits(const std::vector<uint8_t>& bits) {
  std::string out;
  for (size_t b = 0; 8 * b + 7 < bits.size(); ++b) {
    uint8_t byte = 0;
    for (unsigned i = 0; i < 8; ++i)
      if (bits[8 * b + i]) byte |= static_cast<uint8_t>(1u << i);
    if (byte == 0) break;  // padding starts here (NUL banned in data)
    out.push_back(static_cast<char>(byte));
  }
  return out;
}

PlainValue PlainValue::of_uint(uint64_t v) {
  return PlainValue{ColumnKind::Uint, v, {}};
}

PlainValue PlainValue::of_string(std::string v) {
  return PlainValue{ColumnKind::String, 0, std::move(v)};
}

std::string PlainValue::display() const {
  return kind == ColumnKind::Uint ? std::to_string(uint_value) : string_value;
}

std::vector<uint8_t> encode_value_bits(const PlainValue& v,
                                       const ColumnSpec& spec) {
  if (v.kind != spec.kind)
    throw Error(ErrorCode::TypeMismatch,
                std::string("value of kind ") + column_kind_name(v.kind) +
                    " for " + column_kind_name(spec.kind) + " column '" +
                    spec.name + "'");
  return spec.kind == ColumnKind::Uint
             ? encode_uint_bits(v.uint_value, spec.bit_width)
             : encode_string_bits(v.string_value, spec.bit_width);
}

PlainValue decode_value_bits(const std::vector<uint8_t>& bits,
                             const ColumnSpec& spec) {
  if (bits.size() != spec.bit_width)
    throw Error(ErrorCode::WidthMismatch,
                "word width does not match column '" + spec.name + "'");
  return spec.kind == ColumnKind::Uint
             ? PlainValue::of_uint(decode_uint_bits(bits))
             : PlainValue::of_string(decode_string_bits(bits));
}

TableSchema parse_schema_text(const std::string& text,
                              const std::string& table_name) {
  TableSchema schema;
  schema.table_name = table_name;
  std::istringstream in(text);
  std::string line;
  unsigned lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Trim surrounding whitespace.
    size_t b = line.find_first_not_of(" \t\r");
    size_t e = line.find_last_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::string t = line.substr(b, e - b + 1);
    if (t[0] == '#') continue;

    const std::string where = " (line " + std::to_string(lineno) + ")";
    size_t c1 = t.find(':');
    size_t c2 = c1 == std::string::npos ? std::string::npos
                                        : t.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw Error(ErrorCode::InvalidSchema,
                  "expected name:kind:bits" + where);
    ColumnSpec col;
    col.name = t.substr(0, c1);
    std::string kind = t.substr(c1 + 1, c2 - c1 - 1);
    std::string bits = t.substr(c2 + 1);
    if (kind == "uint") {
      col.kind = ColumnKind::Uint;
    } else if (kind == "string") {
      col.kind = ColumnKind::String;
    } else {
      throw Error(ErrorCode::InvalidSchema,
                  "unknown column kind '" + kind + "'" + where);
    }
    try {
      size_t used = 0;
      unsigned long w = std::stoul(bits, &used);
      if (used != bits.size() || w == 0 || w > 0xffff)
        throw std::invalid_argument("range");
      col.bit_width = static_cast<uint16_t>(w);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidSchema,
                  "bad bit width '" + bits + "'" + where);
    }
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

std::string schema_to_text(const TableSchema& schema) {
  std::string out;
  for (const ColumnSpec& c : schema.columns) {
    out += c.name;
    out += ':';
    out += column_kind_name(c.kind);
    out += ':';
    out += std::to_string(c.bit_width);
    out += '\n';
  }
  return out;
}

void serialize_schema_block(const TableSchema& schema,
                            std::vector<uint8_t>& out) {
  if (schema.columns.size() > 255)
    throw Error(ErrorCode::InvalidSchema, "too many columns");
  put_u8(out, static_cast<uint8_t>(schema.columns.size()));
  for (const ColumnSpec& c : schema.columns) {
    put_u8(out, static_cast<uint8_t>(c.name.size()));
    out.insert(out.end(), c.name.begin(), c.name.end());
    put_u8(out, static_cast<uint8_t>(c.kind));
    put_u16(out, c.bit_width);
  }
}

size_t parse_schema_block(const uint8_t* data, size_t len, size_t pos,
                          TableSchema& out) {
  ByteReader r{data, len, pos};
  unsigned count = r.u8();
  out.columns.clear();
  out.columns.reserve(count);
  for (unsigned i = 0; i < count; ++i) {
    ColumnSpec col;
    unsigned name_len = r.u8();
    col.name = r.str(name_len);
    uint8_t kind = r.u8();
    if (kind != static_cast<uint8_t>(ColumnKind::Uint) &&
        kind != static_cast<uint8_t>(ColumnKind::String))
      throw Error(ErrorCode::InvalidSchema,
                  "unknown column kind byte in schema block");
    col.kind = static_cast<ColumnKind>(kind);
    col.bit_width = r.u16();
    out.columns.push_back(std::move(col));
  }
  return r.pos;
}

}  // namespace hedb
