// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Big-endian byte packing helpers shared by the file formats and the wire
// protocol. All formats in this project are big-endian.

#ifndef HEDB_BYTES_HPP
#define HEDB_BYTES_HPP

#include <gmpxx.h>

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "hedb/error.hpp"

namespace hedb {

inline void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
}

inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
}

// Cursor over a read-only buffer; every read checks bounds.
struct ByteReader {
  const uint8_t* data = nullptr;
  size_t len = 0;
  size_t pos = 0;

  ByteReader(const uint8_t* d, size_t l, size_t p = 0)
      : data(d), len(l), pos(p) {}
  explicit ByteReader(const std::vector<uint8_t>& v)
      : data(v.data()), len(v.size()) {}

  void need(size_t n) const {
    if (pos + n > len)
      throw Error(ErrorCode::TruncatedPayload, "input ends unexpectedly", pos);
  }
  uint8_t u8() {
    need(1);
    return data[pos++];
  }
  uint16_t u16() {
    need(2);
    uint16_t v = (uint16_t(data[pos]) << 8) | data[pos + 1];
    pos += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data[pos + i];
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data[pos + i];
    pos += 8;
    return v;
  }
  std::string str(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return s;
  }
  std::vector<uint8_t> bytes(size_t n) {
    need(n);
    std::vector<uint8_t> v(data + pos, data + pos + n);
    pos += n;
    return v;
  }
  bool done() const { return pos == len; }
};

// Magnitude of a non-negative mpz as minimal big-endian bytes (empty for 0).
inline std::vector<uint8_t> mpz_to_bytes(const mpz_class& v) {
  std::vector<uint8_t> out;
  if (v == 0) return out;
  size_t count = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  out.resize(count);
  size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(written);
  return out;
}

inline mpz_class mpz_from_bytes(const uint8_t* data, size_t n) {
  mpz_class v;
  if (n > 0) mpz_import(v.get_mpz_t(), n, 1, 1, 1, 0, data);
  return v;
}

}  // namespace hedb

#endif  // HEDB_BYTES_HPP
