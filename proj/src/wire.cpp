// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/wire.hpp"

#include <cstring>

#include "hedb/bytes.hpp"
#include "hedb/error.hpp"

namespace hedb {

namespace {

constexpr char kMagic[4] = {'H', 'E', 'D', 'B'};

void put_name(std::vector<uint8_t>& out, const std::string& name,
              const char* what) {
  if (name.empty() || name.size() > 255)
    throw Error(ErrorCode::Internal, std::string("bad length for ") + what);
  put_u8(out, static_cast<uint8_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
}

std::string read_name(ByteReader& r) { return r.str(r.u8()); }

void put_mpz(std::vector<uint8_t>& out, const mpz_class& v) {
  std::vector<uint8_t> mag = mpz_to_bytes(v);
  put_u32(out, static_cast<uint32_t>(mag.size()));
  out.insert(out.end(), mag.begin(), mag.end());
}

mpz_class read_mpz(ByteReader& r) {
  const uint32_t n = r.u32();
  r.need(n);
  mpz_class v = mpz_from_bytes(r.data + r.pos, n);
  r.pos += n;
  return v;
}

void put_word(std::vector<uint8_t>& out, const EncryptedWord& w) {
  for (const Ciphertext& ct : w.bits) serialize_ciphertext(ct, out);
}

EncryptedWord read_word(const std::vector<uint8_t>& payload, size_t& pos,
                        unsigned width, const CtxPtr& ctx,
                        uint32_t noise_bits) {
  EncryptedWord w;
  w.bits.reserve(width);
  for (unsigned i = 0; i < width; ++i) {
    Ciphertext ct;
    pos = parse_ciphertext(payload.data(), payload.size(), pos, ctx,
                           noise_bits, ct);
    w.bits.push_back(std::move(ct));
  }
  return w;
}

}  // namespace

FrameHeader parse_frame_header(const uint8_t* data) {
  if (std::memcmp(data, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::MalformedFrame, "bad frame magic");
  if (data[4] != kWireVersion)
    throw Error(ErrorCode::UnsupportedVersion,
                "unsupported protocol version " + std::to_string(data[4]));
  const uint8_t t = data[5];
  if (t < static_cast<uint8_t>(MsgType::CreateTable) ||
      t > static_cast<uint8_t>(MsgType::Ping))
    throw Error(ErrorCode::UnknownMessageType,
                "unknown message type " + std::to_string(t));
  FrameHeader h;
  h.type = static_cast<MsgType>(t);
  h.length = (uint32_t(data[6]) << 24) | (uint32_t(data[7]) << 16) |
             (uint32_t(data[8]) << 8) | uint32_t(data[9]);
  return h;
}

std::vector<uint8_t> build_frame(MsgType type,
                                 const std::vector<uint8_t>& payload) {
  std::vector<uint8_t> out;
  out.reserve(kFrameHeaderSize + payload.size());
  out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
  put_u8(out, kWireVersion);
  put_u8(out, static_cast<uint8_t>(type));
  put_u32(out, static_cast<uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<uint8_t> build_create_table(const TableSchema& schema,
                                        const CipherContext& ctx) {
  std::vector<uint8_t> out;
  put_name(out, schema.table_name, "table name");
  serialize_schema_block(schema, out);
  const SecurityParams& p = ctx.params;
  put_u8(out, static_cast<uint8_t>(p.lambda));
  put_u32(out, p.p_bits);
  put_u32(out, p.q_bits);
  put_u16(out, static_cast<uint16_t>(p.alpha));
  put_u16(out, static_cast<uint16_t>(p.beta));
  put_u16(out, static_cast<uint16_t>(p.frac_bits));
  put_mpz(out, ctx.x0);
  for (const mpz_class& y : ctx.y) put_mpz(out, y);
  return out;
}

CreateTableMsg parse_create_table(const std::vector<uint8_t>& payload) {
  CreateTableMsg msg;
  ByteReader r(payload);
  msg.schema.table_name = read_name(r);
  r.pos = parse_schema_block(payload.data(), payload.size(), r.pos,
                             msg.schema);
  msg.schema.validate();

  msg.params.lambda = r.u8();
  msg.params.n_bits = msg.params.lambda;
  msg.params.p_bits = r.u32();
  msg.params.q_bits = r.u32();
  msg.params.alpha = r.u16();
  msg.params.beta = r.u16();
  msg.params.frac_bits = r.u16();
  msg.params.validate();

  msg.x0 = read_mpz(r);
  if (msg.x0 <= 0)
    throw Error(ErrorCode::MalformedFrame, "table context lacks a modulus");
  msg.y.reserve(msg.params.beta);
  for (unsigned i = 0; i < msg.params.beta; ++i) msg.y.push_back(read_mpz(r));
  if (!r.done())
    throw Error(ErrorCode::MalformedFrame, "trailing bytes in CREATE_TABLE",
                r.pos);
  return msg;
}

std::vector<uint8_t> build_insert_row(const std::string& table,
                                      const EncryptedRecord& rec) {
  std::vector<uint8_t> out;
  put_name(out, table, "table name");
  for (const EncryptedWord& w : rec.words) put_word(out, w);
  return out;
}

size_t parse_insert_row_name(const std::vector<uint8_t>& payload,
                             std::string& table) {
  ByteReader r(payload);
  table = read_name(r);
  return r.pos;
}

EncryptedRecord parse_insert_row(const std::vector<uint8_t>& payload,
                                 size_t pos, const TableSchema& schema,
                                 const CtxPtr& ctx, uint32_t noise_bits) {
  EncryptedRecord rec;
  rec.words.reserve(schema.columns.size());
  for (const ColumnSpec& col : schema.columns)
    rec.words.push_back(
        read_word(payload, pos, col.bit_width, ctx, noise_bits));
  if (pos != payload.size())
    throw Error(ErrorCode::MalformedFrame, "trailing bytes in INSERT_ROW",
                pos);
  return rec;
}

std::vector<uint8_t> build_query(const CompiledQuery& q) {
  std::vector<uint8_t> out;
  const CompiledShape& s = q.shape;
  put_u8(out, static_cast<uint8_t>(s.kind));
  put_name(out, s.table, "table name");
  put_name(out, s.column, "column name");
  put_u8(out, static_cast<uint8_t>(s.op));
  put_u16(out, s.operand_bits);
  put_u16(out, s.eta_bits);
  put_u16(out, s.u_bits);
  if (s.op == PredOp::Pattern) {
    put_u16(out, static_cast<uint16_t>(s.pattern.mask.size()));
    out.insert(out.end(), s.pattern.mask.begin(), s.pattern.mask.end());
    put_u8(out, s.pattern.prefix_only ? 1 : 0);
  }
  if (s.kind == StatementKind::Avg) put_name(out, s.avg_column, "column name");
  put_word(out, q.operand);
  put_word(out, q.eta);
  put_word(out, q.update_u);
  return out;
}

size_t parse_query_shape(const std::vector<uint8_t>& payload,
                         CompiledShape& shape) {
  ByteReader r(payload);
  const uint8_t kind = r.u8();
  if (kind < static_cast<uint8_t>(StatementKind::Select) ||
      kind > static_cast<uint8_t>(StatementKind::Avg))
    throw Error(ErrorCode::MalformedFrame,
                "unknown statement kind " + std::to_string(kind));
  shape.kind = static_cast<StatementKind>(kind);
  shape.table = read_name(r);
  shape.column = read_name(r);
  const uint8_t op = r.u8();
  if (op < static_cast<uint8_t>(PredOp::Eq) ||
      op > static_cast<uint8_t>(PredOp::Pattern))
    throw Error(ErrorCode::MalformedFrame,
                "unknown operator byte " + std::to_string(op));
  shape.op = static_cast<PredOp>(op);
  shape.operand_bits = r.u16();
  shape.eta_bits = r.u16();
  shape.u_bits = r.u16();
  if (shape.op == PredOp::Pattern) {
    const uint16_t mask_len = r.u16();
    shape.pattern.mask = r.bytes(mask_len);
    for (uint8_t m : shape.pattern.mask)
      if (m > 1)
        throw Error(ErrorCode::MalformedFrame, "pattern mask byte not 0/1");
    shape.pattern.prefix_only = r.u8() != 0;
    if (shape.operand_bits != 8 * shape.pattern.mask.size())
      throw Error(ErrorCode::ShapeMismatch,
                  "pattern literal width does not match its mask");
  }
  if (shape.kind == StatementKind::Avg) shape.avg_column = read_name(r);
  return r.pos;
}

void parse_query_operands(const std::vector<uint8_t>& payload, size_t pos,
                          const CompiledShape& shape, const CtxPtr& ctx,
                          uint32_t noise_bits, CompiledQuery& out) {
  out.shape = shape;
  out.operand = read_word(payload, pos, shape.operand_bits, ctx, noise_bits);
  out.eta = read_word(payload, pos, shape.eta_bits, ctx, noise_bits);
  out.update_u = read_word(payload, pos, shape.u_bits, ctx, noise_bits);
  if (pos != payload.size())
    throw Error(ErrorCode::MalformedFrame, "trailing bytes in QUERY", pos);
}

std::vector<uint8_t> build_result(const std::vector<Ciphertext>& cts) {
  std::vector<uint8_t> out;
  put_u32(out, static_cast<uint32_t>(cts.size()));
  for (const Ciphertext& ct : cts) serialize_ciphertext(ct, out);
  return out;
}

std::vector<Ciphertext> parse_result(const std::vector<uint8_t>& payload,
                                     const CtxPtr& ctx, uint32_t noise_bits) {
  ByteReader r(payload);
  const uint32_t count = r.u32();
  std::vector<Ciphertext> cts;
  cts.reserve(count);
  size_t pos = r.pos;
  for (uint32_t i = 0; i < count; ++i) {
    Ciphertext ct;
    pos = parse_ciphertext(payload.data(), payload.size(), pos, ctx,
                           noise_bits, ct);
    cts.push_back(std::move(ct));
  }
  if (pos != payload.size())
    throw Error(ErrorCode::MalformedFrame, "trailing bytes in RESULT", pos);
  return cts;
}

std::vector<uint8_t> build_counters(const OpCounters& counters) {
  std::vector<uint8_t> out;
  put_u64(out, counters.additions);
  put_u64(out, counters.multiplications);
  put_u64(out, counters.recrypts);
  return out;
}

OpCounters parse_counters(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  OpCounters c;
  c.additions = r.u64();
  c.multiplications = r.u64();
  c.recrypts = r.u64();
  if (!r.done())
    throw Error(ErrorCode::MalformedFrame, "trailing bytes in COUNTERS",
                r.pos);
  return c;
}

std::vector<uint8_t> build_error(ErrorCode code, const std::string& message) {
  std::vector<uint8_t> out;
  put_u16(out, static_cast<uint16_t>(code));
  put_u32(out, static_cast<uint32_t>(message.size()));
  out.insert(out.end(), message.begin(), message.end());
  return out;
}

WireError parse_error(const std::vector<uint8_t>& payload) {
  ByteReader r(payload);
  WireError e;
  e.code = static_cast<ErrorCode>(r.u16());
  e.message = r.str(r.u32());
  return e;
}

}  // namespace hedb
