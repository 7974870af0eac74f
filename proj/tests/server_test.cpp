// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Wire protocol and blind-server tests: frame headers, payload codecs, the
// in-process request surface, crash-safe persistence, ciphertext refresh,
// and the TCP accept loop.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/socket.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "hedb/circuits.hpp"
#include "hedb/encoding.hpp"
#include "hedb/error.hpp"
#include "hedb/estimate.hpp"
#include "hedb/he.hpp"
#include "hedb/net.hpp"
#include "hedb/rng.hpp"
#include "hedb/server.hpp"
#include "hedb/sql.hpp"
#include "hedb/table.hpp"
#include "hedb/wire.hpp"

namespace fs = std::filesystem;
using namespace hedb;

namespace {

KeySet test_key(unsigned budget, uint64_t seed = 7) {
  Rng rng(seed);
  return keygen(SecurityParams::for_budget(2, budget), rng);
}

uint64_t dec_uint(const std::vector<Ciphertext>& bits, const SecretKey& sk) {
  uint64_t v = 0;
  for (size_t i = 0; i < bits.size(); ++i)
    v |= uint64_t(decrypt_bit(bits[i], sk)) << i;
  return v;
}

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/hedb-server-test-XXXXXX";
    char* p = mkdtemp(tmpl);
    REQUIRE(p != nullptr);
    path = p;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

TableSchema two_col_schema(const std::string& name = "t") {
  return parse_schema_text("v:uint:4\nw:uint:4\n", name);
}

Frame create_frame(const TableSchema& s, const KeySet& k) {
  return Frame{MsgType::CreateTable, build_create_table(s, *k.ctx)};
}

Frame insert_frame(const std::string& table, unsigned v, unsigned w,
                   const TableSchema& s, const KeySet& k, Rng& rng) {
  EncryptedRecord rec = encrypt_record(
      {PlainValue::of_uint(v), PlainValue::of_uint(w)}, s, k, rng);
  return Frame{MsgType::InsertRow, build_insert_row(table, rec)};
}

Frame query_frame(const std::string& sql, const TableSchema& s, unsigned n,
                  const KeySet& k, Rng& rng) {
  ValidatedQuery vq = validate_query(parse_query(sql), s);
  CompiledQuery cq = compile_query(vq, s, n, k, rng);
  return Frame{MsgType::Query, build_query(cq)};
}

void expect_ack(const std::vector<Frame>& replies, const CtxPtr& ctx) {
  REQUIRE(replies.size() == 1);
  REQUIRE(replies[0].type == MsgType::Result);
  CHECK(parse_result(replies[0].payload, ctx, 0).empty());
}

WireError expect_error(const std::vector<Frame>& replies) {
  REQUIRE(replies.size() == 1);
  REQUIRE(replies[0].type == MsgType::ErrorReply);
  return parse_error(replies[0].payload);
}

StatementShape two_col_shape(StatementKind kind, unsigned rows,
                             uint32_t cell_noise) {
  StatementShape sh{};
  sh.kind = kind;
  sh.op = PredOp::Eq;
  sh.rows = rows;
  sh.operand_bits = 4;
  sh.record_bits = 8;
  sh.avg_bits = 4;
  sh.cell_noise = cell_noise;
  return sh;
}

void send_all(int fd, const uint8_t* data, size_t len) {
  while (len > 0) {
    ssize_t n = ::send(fd, data, len, 0);
    REQUIRE(n > 0);
    data += static_cast<size_t>(n);
    len -= static_cast<size_t>(n);
  }
}

}  // namespace

TEST_CASE("frame headers round-trip and reject foreign bytes") {
  std::vector<uint8_t> f = build_frame(MsgType::Ping, {1, 2, 3});
  REQUIRE(f.size() == kFrameHeaderSize + 3);
  FrameHeader h = parse_frame_header(f.data());
  CHECK(h.type == MsgType::Ping);
  CHECK(h.length == 3);

  auto code_of = [&](std::vector<uint8_t> bytes) {
    try {
      parse_frame_header(bytes.data());
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };

  std::vector<uint8_t> bad = f;
  bad[0] = 'X';
  CHECK(code_of(bad) == ErrorCode::MalformedFrame);

  bad = f;
  bad[4] = 0x02;  // version byte
  CHECK(code_of(bad) == ErrorCode::UnsupportedVersion);

  bad = f;
  bad[5] = 0;  // below the first message type
  CHECK(code_of(bad) == ErrorCode::UnknownMessageType);
  bad[5] = 8;  // past the last message type
  CHECK(code_of(bad) == ErrorCode::UnknownMessageType);
}

TEST_CASE("create-table payloads carry the schema and evaluation context") {
  KeySet k = test_key(64);
  TableSchema s = parse_schema_text("id:uint:8\nname:string:32\n", "people");

  std::vector<uint8_t> payload = build_create_table(s, *k.ctx);
  CreateTableMsg msg = parse_create_table(payload);
  CHECK(msg.schema.table_name == "people");
  REQUIRE(msg.schema.columns.size() == 2);
  CHECK(msg.schema.columns[0].name == "id");
  CHECK(msg.schema.columns[1].name == "name");
  CHECK(msg.schema.columns[1].kind == ColumnKind::String);
  CHECK(msg.schema.columns[1].bit_width == 32);
  CHECK(msg.params.lambda == k.params.lambda);
  CHECK(msg.params.p_bits == k.params.p_bits);
  CHECK(msg.params.beta == k.params.beta);
  CHECK(msg.params.frac_bits == k.params.frac_bits);
  CHECK(msg.x0 == k.ctx->x0);
  CHECK(msg.y == k.ctx->y);

  // Every strict prefix fails cleanly: the codec never reads past its input.
  for (size_t cut = 0; cut < payload.size(); ++cut) {
    std::vector<uint8_t> prefix(payload.begin(), payload.begin() + cut);
    CHECK_THROWS_AS(parse_create_table(prefix), Error);
  }
}

TEST_CASE("insert payloads round-trip records bit for bit") {
  KeySet k = test_key(64);
  Rng rng(50);
  TableSchema s = two_col_schema();
  EncryptedRecord rec = encrypt_record(
      {PlainValue::of_uint(11), PlainValue::of_uint(6)}, s, k, rng);

  std::vector<uint8_t> payload = build_insert_row("t", rec);
  std::string table;
  size_t pos = parse_insert_row_name(payload, table);
  CHECK(table == "t");

  EncryptedRecord back = parse_insert_row(payload, pos, s, k.ctx, 7);
  REQUIRE(back.words.size() == 2);
  REQUIRE(back.words[0].width() == 4);
  CHECK(back.words[0].bits[0].noise_bits == 7);  // caller-stamped
  CHECK(back.words[0].bits[0].ctx == k.ctx);
  std::vector<PlainValue> vals = decrypt_record(back, s, k.sk);
  CHECK(vals[0].uint_value == 11);
  CHECK(vals[1].uint_value == 6);

  // A record of the wrong shape cannot be smuggled in under this schema.
  TableSchema wide = parse_schema_text("v:uint:4\nw:uint:4\nx:uint:4\n", "t");
  EncryptedRecord extra = encrypt_record({PlainValue::of_uint(1),
                                          PlainValue::of_uint(2),
                                          PlainValue::of_uint(3)},
                                         wide, k, rng);
  std::vector<uint8_t> bad = build_insert_row("t", extra);
  size_t bad_pos = parse_insert_row_name(bad, table);
  CHECK_THROWS_AS(parse_insert_row(bad, bad_pos, s, k.ctx, 2), Error);
}

TEST_CASE("query payloads carry shape plus ciphertext and nothing else") {
  KeySet k = test_key(64);
  Rng rng(51);
  TableSchema t = two_col_schema();
  TableSchema people = parse_schema_text("id:uint:8\nname:string:32\n",
                                         "people");

  auto round_trip = [&](const std::string& sql, const TableSchema& s,
                        unsigned n) {
    ValidatedQuery vq = validate_query(parse_query(sql), s);
    CompiledQuery cq = compile_query(vq, s, n, k, rng);
    std::vector<uint8_t> payload = build_query(cq);
    CompiledShape shape;
    size_t pos = parse_query_shape(payload, shape);
    CHECK(shape == cq.shape);
    CompiledQuery out;
    parse_query_operands(payload, pos, shape, k.ctx, 7, out);
    return out;
  };

  SUBCASE("select carries operand and match ordinal") {
    CompiledQuery q = round_trip("SELECT * FROM t WHERE v = 5", t, 2);
    CHECK(q.shape.kind == StatementKind::Select);
    CHECK(q.shape.table == "t");
    CHECK(q.shape.column == "v");
    CHECK(q.shape.operand_bits == 4);
    CHECK(q.shape.eta_bits == eta_width(8));
    CHECK(q.shape.u_bits == 0);
    CHECK(dec_uint(q.operand.bits, k.sk) == 5);
    CHECK(dec_uint(q.eta.bits, k.sk) == 2);
    CHECK(q.update_u.bits.empty());
    CHECK(q.operand.bits[0].noise_bits == 7);  // caller-stamped
  }
  SUBCASE("update carries the full replacement record") {
    CompiledQuery q = round_trip("UPDATE t SET v = 1, w = 2 WHERE w > 3", t, 1);
    CHECK(q.shape.kind == StatementKind::Update);
    CHECK(q.shape.op == PredOp::Gt);
    CHECK(q.shape.column == "w");
    CHECK(q.shape.u_bits == 8);
    CHECK(dec_uint(q.update_u.bits, k.sk) == (1u | (2u << 4)));
  }
  SUBCASE("avg names its target column") {
    CompiledQuery q =
        round_trip("SELECT AVG(id) FROM people WHERE id < 9", people, 1);
    CHECK(q.shape.kind == StatementKind::Avg);
    CHECK(q.shape.op == PredOp::Lt);
    CHECK(q.shape.avg_column == "id");
    CHECK(q.shape.operand_bits == 8);
    CHECK(dec_uint(q.operand.bits, k.sk) == 9);
  }
  SUBCASE("wildcard equality ships mask bytes plus literal characters") {
    CompiledQuery q =
        round_trip("SELECT * FROM people WHERE name = 'a?*'", people, 1);
    CHECK(q.shape.op == PredOp::Pattern);
    CHECK(q.shape.pattern.mask == std::vector<uint8_t>{1, 0});
    CHECK(q.shape.pattern.prefix_only);
    CHECK(q.shape.operand_bits == 16);
    // Literal characters travel encrypted: 'a', then a placeholder byte.
    CHECK(dec_uint(q.operand.bits, k.sk) == 0x61u);
  }
  SUBCASE("truncated query payloads fail cleanly at every cut") {
    ValidatedQuery vq =
        validate_query(parse_query("SELECT * FROM t WHERE v = 5"), t);
    CompiledQuery cq = compile_query(vq, t, 1, k, rng);
    std::vector<uint8_t> payload = build_query(cq);
    for (size_t cut = 0; cut < payload.size(); cut += 7) {
      std::vector<uint8_t> prefix(payload.begin(), payload.begin() + cut);
      CompiledShape shape;
      CompiledQuery out;
      CHECK_THROWS_AS(
          parse_query_operands(prefix, parse_query_shape(prefix, shape), shape,
                               k.ctx, 2, out),
          Error);
    }
  }
}

TEST_CASE("result, counter, and error payloads round-trip") {
  KeySet k = test_key(64);
  Rng rng(52);

  std::vector<Ciphertext> cts;
  for (int b : {1, 0, 1}) cts.push_back(encrypt_bit(b, k, rng));
  std::vector<Ciphertext> back =
      parse_result(build_result(cts), k.ctx, 5);
  REQUIRE(back.size() == 3);
  CHECK(back[0].noise_bits == 5);
  CHECK(decrypt_bit(back[0], k.sk) == 1);
  CHECK(decrypt_bit(back[1], k.sk) == 0);
  CHECK(decrypt_bit(back[2], k.sk) == 1);
  CHECK(parse_result(build_result({}), k.ctx, 0).empty());
  std::vector<uint8_t> truncated = build_result(cts);
  truncated.resize(truncated.size() / 2);
  CHECK_THROWS_AS(parse_result(truncated, k.ctx, 0), Error);

  OpCounters c;
  c.additions = 12345678901ull;
  c.multiplications = 987654321ull;
  c.recrypts = 42;
  CHECK(parse_counters(build_counters(c)) == c);
  std::vector<uint8_t> cut = build_counters(c);
  cut.resize(20);
  CHECK_THROWS_AS(parse_counters(cut), Error);
  std::vector<uint8_t> padded = build_counters(c);
  padded.push_back(0);
  CHECK_THROWS_AS(parse_counters(padded), Error);

  WireError we = parse_error(
      build_error(ErrorCode::UnknownTable, "no table 'x'"));
  CHECK(we.code == ErrorCode::UnknownTable);
  CHECK(we.message == "no table 'x'");
}

TEST_CASE("the request surface: create, insert, query, mutate") {
  // Size the key by replaying every statement this test will run, feeding
  // each mutation's output noise into the next statement's cells.
  SecurityParams probe = SecurityParams::for_budget(2, 64);
  auto noise = [&](StatementKind kind, uint32_t cell) {
    return estimate_statement(probe, two_col_shape(kind, 3, cell)).out_noise;
  };
  uint32_t need = noise(StatementKind::Select, 0);
  need = std::max(need, noise(StatementKind::Count, 0));
  need = std::max(need, noise(StatementKind::Avg, 0));
  const uint32_t after_update = noise(StatementKind::Update, 0);
  need = std::max(need, after_update);
  need = std::max(need, noise(StatementKind::Select, after_update));
  const uint32_t after_delete = noise(StatementKind::Delete, after_update);
  need = std::max(need, after_delete);
  need = std::max(need, noise(StatementKind::Count, after_delete));

  Rng rng(21);
  KeySet k = keygen(SecurityParams::for_budget(2, need), rng);
  TableSchema s = two_col_schema();
  TempDir dir;
  ServerOptions o;
  o.data_dir = dir.path;
  Server srv(o);
  srv.load();

  expect_ack(srv.handle_frame(create_frame(s, k)), k.ctx);
  CHECK(srv.has_table("t"));
  CHECK(srv.table_rows("t") == 0);
  CHECK(expect_error(srv.handle_frame(create_frame(s, k))).code ==
        ErrorCode::DuplicateTable);

  for (auto [v, w] : {std::pair<unsigned, unsigned>{5, 1}, {7, 2}, {5, 3}})
    expect_ack(srv.handle_frame(insert_frame("t", v, w, s, k, rng)), k.ctx);
  CHECK(srv.table_rows("t") == 3);
  CHECK(srv.table_watermark("t") == k.params.n_bits);
  CHECK(expect_error(srv.handle_frame(insert_frame("ghost", 1, 1, s, k, rng)))
            .code == ErrorCode::UnknownTable);

  // SELECT: the second v=5 row comes back, and the operation counters match
  // a client-side replay of the same shape.
  std::vector<Frame> replies = srv.handle_frame(
      query_frame("SELECT * FROM t WHERE v = 5", s, 2, k, rng));
  REQUIRE(replies.size() == 2);
  REQUIRE(replies[0].type == MsgType::Result);
  REQUIRE(replies[1].type == MsgType::Counters);
  std::vector<Ciphertext> cts = parse_result(
      replies[0].payload, k.ctx, noise(StatementKind::Select, 0));
  REQUIRE(cts.size() == 8);
  CHECK(dec_uint(cts, k.sk) == (5u | (3u << 4)));
  CHECK(parse_counters(replies[1].payload) ==
        estimate_statement(probe, two_col_shape(StatementKind::Select, 3, 0))
            .counters);

  replies = srv.handle_frame(
      query_frame("SELECT COUNT(*) FROM t WHERE v = 5", s, 1, k, rng));
  cts = parse_result(replies[0].payload, k.ctx,
                     noise(StatementKind::Count, 0));
  REQUIRE(cts.size() == kCounterBits);
  CHECK(dec_uint(cts, k.sk) == 2);

  replies = srv.handle_frame(
      query_frame("SELECT AVG(w) FROM t WHERE v = 5", s, 1, k, rng));
  cts = parse_result(replies[0].payload, k.ctx, noise(StatementKind::Avg, 0));
  REQUIRE(cts.size() == sum_result_width(4) + kCounterBits);
  {
    std::vector<Ciphertext> sum_bits(cts.begin(),
                                     cts.begin() + sum_result_width(4));
    std::vector<Ciphertext> cnt_bits(cts.begin() + sum_result_width(4),
                                     cts.end());
    CHECK(dec_uint(sum_bits, k.sk) == 4);  // w values 1 + 3
    CHECK(dec_uint(cnt_bits, k.sk) == 2);
  }

  // UPDATE rewrites in place; the stored-noise watermark rises to exactly
  // the estimator's output level for this shape.
  replies = srv.handle_frame(
      query_frame("UPDATE t SET v = 9, w = 9 WHERE v = 7", s, 1, k, rng));
  REQUIRE(replies.size() == 2);
  CHECK(parse_result(replies[0].payload, k.ctx, 0).empty());
  CHECK(srv.table_watermark("t") == after_update);

  replies = srv.handle_frame(
      query_frame("SELECT * FROM t WHERE v = 9", s, 1, k, rng));
  cts = parse_result(replies[0].payload, k.ctx,
                     noise(StatementKind::Select, after_update));
  CHECK(dec_uint(cts, k.sk) == (9u | (9u << 4)));

  // DELETE zeroes matching rows blindly: the row count cannot change.
  replies = srv.handle_frame(
      query_frame("DELETE FROM t WHERE v = 5", s, 1, k, rng));
  REQUIRE(replies.size() == 2);
  CHECK(srv.table_rows("t") == 3);
  CHECK(srv.table_watermark("t") == after_delete);

  auto count_of = [&](const std::string& sql) {
    std::vector<Frame> r = srv.handle_frame(query_frame(sql, s, 1, k, rng));
    std::vector<Ciphertext> bits = parse_result(
        r[0].payload, k.ctx, noise(StatementKind::Count, after_delete));
    return dec_uint(bits, k.sk);
  };
  CHECK(count_of("SELECT COUNT(*) FROM t WHERE v = 5") == 0);
  CHECK(count_of("SELECT COUNT(*) FROM t WHERE v = 9") == 1);
  CHECK(count_of("SELECT COUNT(*) FROM t WHERE v = 0") == 2);

  // Broken requests come back as ERROR frames; the server stays up.
  Frame cut = query_frame("SELECT * FROM t WHERE v = 5", s, 1, k, rng);
  cut.payload.resize(cut.payload.size() / 2);
  CHECK(expect_error(srv.handle_frame(cut)).code ==
        ErrorCode::TruncatedPayload);
  CHECK(expect_error(srv.handle_frame(Frame{MsgType::Counters, {}})).code ==
        ErrorCode::UnknownMessageType);

  std::vector<Frame> pong =
      srv.handle_frame(Frame{MsgType::Ping, {0xAB, 0xCD}});
  REQUIRE(pong.size() == 1);
  CHECK(pong[0].type == MsgType::Ping);
  CHECK(pong[0].payload == std::vector<uint8_t>{0xAB, 0xCD});
}

TEST_CASE("tables survive a server restart byte for byte") {
  SecurityParams probe = SecurityParams::for_budget(2, 64);
  auto noise = [&](StatementKind kind, uint32_t cell) {
    return estimate_statement(probe, two_col_shape(kind, 2, cell)).out_noise;
  };
  const uint32_t after_update = noise(StatementKind::Update, 0);
  uint32_t need = std::max(noise(StatementKind::Select, 0), after_update);
  need = std::max(need, noise(StatementKind::Select, after_update));

  Rng rng(41);
  KeySet k = keygen(SecurityParams::for_budget(2, need), rng);
  TableSchema s = two_col_schema();
  TempDir dir;
  ServerOptions o;
  o.data_dir = dir.path;

  {
    Server a(o);
    a.load();
    expect_ack(a.handle_frame(create_frame(s, k)), k.ctx);
    expect_ack(a.handle_frame(insert_frame("t", 5, 1, s, k, rng)), k.ctx);
    expect_ack(a.handle_frame(insert_frame("t", 7, 2, s, k, rng)), k.ctx);
  }
  CHECK(fs::exists(fs::path(dir.path) / "t.tbl"));
  CHECK(fs::exists(fs::path(dir.path) / "t.meta"));

  {
    Server b(o);
    b.load();
    CHECK(b.has_table("t"));
    CHECK(b.table_rows("t") == 2);
    CHECK(b.table_watermark("t") == k.params.n_bits);
    std::vector<Frame> replies = b.handle_frame(
        query_frame("SELECT * FROM t WHERE v = 7", s, 1, k, rng));
    std::vector<Ciphertext> cts = parse_result(
        replies[0].payload, k.ctx, noise(StatementKind::Select, 0));
    CHECK(dec_uint(cts, k.sk) == (7u | (2u << 4)));

    // Mutate, so the next restart must restore a raised watermark.
    b.handle_frame(query_frame("UPDATE t SET v = 3, w = 3 WHERE v = 5", s, 1,
                               k, rng));
    CHECK(b.table_watermark("t") == after_update);
  }

  {
    Server c(o);
    c.load();
    CHECK(c.table_watermark("t") == after_update);
    std::vector<Frame> replies = c.handle_frame(
        query_frame("SELECT * FROM t WHERE v = 3", s, 1, k, rng));
    std::vector<Ciphertext> cts = parse_result(
        replies[0].payload, k.ctx, noise(StatementKind::Select, after_update));
    CHECK(dec_uint(cts, k.sk) == (3u | (3u << 4)));
  }
}

TEST_CASE("a crash before rename leaves the previous state intact") {
  KeySet k = test_key(600);
  Rng rng(42);
  TableSchema s = two_col_schema();
  TempDir dir;
  ServerOptions o;
  o.data_dir = dir.path;

  {
    Server a(o);
    a.load();
    expect_ack(a.handle_frame(create_frame(s, k)), k.ctx);
    expect_ack(a.handle_frame(insert_frame("t", 5, 1, s, k, rng)), k.ctx);
  }

  {
    ServerOptions crash = o;
    crash.fail_before_rename = true;
    Server b(crash);
    b.load();
    CHECK(b.table_rows("t") == 1);

    WireError we =
        expect_error(b.handle_frame(insert_frame("t", 7, 2, s, k, rng)));
    CHECK(we.code == ErrorCode::Internal);
    CHECK(we.message.find("failpoint") != std::string::npos);
    CHECK(b.table_rows("t") == 1);  // the in-memory row was rolled back

    TableSchema u = two_col_schema("u");
    CHECK(expect_error(b.handle_frame(create_frame(u, k))).code ==
          ErrorCode::Internal);
    CHECK(!b.has_table("u"));
  }

  for (const fs::directory_entry& entry : fs::directory_iterator(dir.path))
    CHECK(entry.path().extension() != ".tmp");

  {
    Server c(o);
    c.load();
    CHECK(c.table_rows("t") == 1);
    CHECK(!c.has_table("u"));
  }
}

TEST_CASE("noise refresh requires a bundle and then pays for itself") {
  TempDir dir;

  SUBCASE("refresh enabled without a bundle fails at startup") {
    ServerOptions o;
    o.data_dir = dir.path;
    o.enable_recrypt = true;
    Server srv(o);
    try {
      srv.load();
      FAIL("load() should refuse to run without a bundle");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BootstrapUnavailable);
    }
  }

  SUBCASE("a bundle keeps deep statements decryptable, but only for its key") {
    Rng rng(31);
    KeySet k = keygen(SecurityParams::for_budget(2, 200), rng);
    save_bootstrap_bundle(k, k.bk, dir.path + "/bootstrap.bsk");
    ServerOptions o;
    o.data_dir = dir.path;
    o.enable_recrypt = true;
    Server srv(o);
    srv.load();
    CHECK(srv.refresh_active());

    TableSchema s = two_col_schema();
    expect_ack(srv.handle_frame(create_frame(s, k)), k.ctx);
    for (auto [v, w] : {std::pair<unsigned, unsigned>{5, 1},
                        {7, 2},
                        {5, 3},
                        {9, 4},
                        {2, 5},
                        {5, 6}})
      expect_ack(srv.handle_frame(insert_frame("t", v, w, s, k, rng)), k.ctx);

    // Without refresh this key could never evaluate the statement.
    REQUIRE(estimate_statement(
                k.params, two_col_shape(StatementKind::Select, 6, 0))
                .out_noise > k.params.noise_limit());

    std::vector<Frame> replies = srv.handle_frame(
        query_frame("SELECT * FROM t WHERE v = 5", s, 2, k, rng));
    REQUIRE(replies.size() == 2);
    OpCounters counters = parse_counters(replies[1].payload);
    CHECK(counters.recrypts > 0);
    // Post-refresh values sit below the half-budget threshold, so no result
    // can carry more than twice that threshold.
    const uint32_t bound = k.params.p_bits - 2;
    std::vector<Ciphertext> cts =
        parse_result(replies[0].payload, k.ctx, bound);
    REQUIRE(cts.size() == 8);
    CHECK(dec_uint(cts, k.sk) == (5u | (3u << 4)));

    // A table under a different key sees no refresh: its modulus does not
    // match the bundle, and a refresh under the wrong key would destroy data.
    Rng rng2(32);
    KeySet other = keygen(SecurityParams::for_budget(2, 2000), rng2);
    TableSchema us = two_col_schema("u");
    expect_ack(srv.handle_frame(create_frame(us, other)), other.ctx);
    expect_ack(srv.handle_frame(insert_frame("u", 5, 1, us, other, rng2)),
               other.ctx);
    expect_ack(srv.handle_frame(insert_frame("u", 7, 2, us, other, rng2)),
               other.ctx);
    replies = srv.handle_frame(
        query_frame("SELECT * FROM u WHERE v = 7", us, 1, other, rng2));
    REQUIRE(replies.size() == 2);
    CHECK(parse_counters(replies[1].payload).recrypts == 0);
    std::vector<Ciphertext> plain = parse_result(
        replies[0].payload, other.ctx,
        estimate_statement(other.params,
                           two_col_shape(StatementKind::Select, 2, 0))
            .out_noise);
    CHECK(dec_uint(plain, other.sk) == (7u | (2u << 4)));
  }
}

TEST_CASE("oversized frames are refused at the door") {
  TempDir dir;
  ServerOptions o;
  o.data_dir = dir.path;
  o.max_payload = 1024;
  Server srv(o);
  srv.load();

  uint16_t port = 0;
  Socket listener = listen_local(port);
  REQUIRE(port != 0);
  std::thread loop([&] { srv.serve(std::move(listener)); });

  {
    Socket c = dial("127.0.0.1", port);
    // A bare header advertising more payload than the server allows. No body
    // follows, so the server's reply and orderly close are deterministic.
    std::vector<uint8_t> header = build_frame(MsgType::Ping, {});
    header[6] = 0;
    header[7] = 0;
    header[8] = 0x08;  // length 2048 > max_payload 1024
    header[9] = 0;
    send_all(c.fd(), header.data(), header.size());

    std::optional<Frame> reply = read_frame(c.fd(), 1u << 20);
    REQUIRE(reply.has_value());
    REQUIRE(reply->type == MsgType::ErrorReply);
    CHECK(parse_error(reply->payload).code == ErrorCode::PayloadTooLarge);
    CHECK(!read_frame(c.fd(), 1u << 20).has_value());  // clean close
  }

  srv.stop();
  loop.join();
}

TEST_CASE("the accept loop serves concurrent clients") {
  TempDir dir;
  KeySet k = test_key(600);
  ServerOptions o;
  o.data_dir = dir.path;
  Server srv(o);
  srv.load();

  uint16_t port = 0;
  Socket listener = listen_local(port);
  std::thread loop([&] { srv.serve(std::move(listener)); });

  // Each client creates its own table over its own connection; asserts stay
  // on this thread, the workers only report outcomes.
  auto client_job = [&](const std::string& table, unsigned v, unsigned w,
                        uint64_t seed, bool& ok) {
    ok = false;
    try {
      Rng rng(seed);
      TableSchema s = two_col_schema(table);
      Socket c = dial("127.0.0.1", port);
      write_frame(c.fd(), MsgType::CreateTable, build_create_table(s, *k.ctx));
      std::optional<Frame> r = read_frame(c.fd(), 1u << 20);
      if (!r || r->type != MsgType::Result) return;
      EncryptedRecord rec = encrypt_record(
          {PlainValue::of_uint(v), PlainValue::of_uint(w)}, s, k, rng);
      write_frame(c.fd(), MsgType::InsertRow, build_insert_row(table, rec));
      r = read_frame(c.fd(), 1u << 20);
      if (!r || r->type != MsgType::Result) return;
      write_frame(c.fd(), MsgType::Ping, {0x5A});
      r = read_frame(c.fd(), 1u << 20);
      if (!r || r->type != MsgType::Ping || r->payload != std::vector<uint8_t>{0x5A})
        return;
      ok = true;
    } catch (...) {
    }
  };

  bool ok1 = false;
  bool ok2 = false;
  std::thread t1(client_job, "alpha", 5, 1, 61, std::ref(ok1));
  std::thread t2(client_job, "beta", 7, 2, 62, std::ref(ok2));
  t1.join();
  t2.join();
  CHECK(ok1);
  CHECK(ok2);
  CHECK(srv.has_table("alpha"));
  CHECK(srv.has_table("beta"));
  CHECK(srv.table_rows("alpha") == 1);
  CHECK(srv.table_rows("beta") == 1);

  // A third connection reads back what the first client wrote.
  {
    Rng rng(63);
    TableSchema s = two_col_schema("alpha");
    Socket c = dial("127.0.0.1", port);
    Frame q = query_frame("SELECT * FROM alpha WHERE v = 5", s, 1, k, rng);
    write_frame(c.fd(), q.type, q.payload);
    std::optional<Frame> result = read_frame(c.fd(), 1u << 20);
    REQUIRE(result.has_value());
    REQUIRE(result->type == MsgType::Result);
    std::optional<Frame> counters = read_frame(c.fd(), 1u << 20);
    REQUIRE(counters.has_value());
    REQUIRE(counters->type == MsgType::Counters);
    const uint32_t stamp =
        estimate_statement(k.params,
                           two_col_shape(StatementKind::Select, 1, 0))
            .out_noise;
    std::vector<Ciphertext> cts = parse_result(result->payload, k.ctx, stamp);
    CHECK(dec_uint(cts, k.sk) == (5u | (1u << 4)));
  }

  srv.stop();
  loop.join();
}
