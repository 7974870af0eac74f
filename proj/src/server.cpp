// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/server.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hedb/circuits.hpp"
#include "hedb/error.hpp"

namespace fs = std::filesystem;

namespace hedb {

namespace {

struct MetaInfo {
  SecurityParams params;
  uint32_t watermark = 0;
  mpz_class x0;
  std::vector<mpz_class> y;
};

std::string meta_line(std::istream& in, const std::string& path,
                      const char* what) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::MalformedHeader,
                path + ": sidecar ends before " + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

mpz_class meta_hex(const std::string& s, const std::string& path,
                   const char* what) {
  mpz_class v;
  if (s.empty() || mpz_set_str(v.get_mpz_t(), s.c_str(), 16) != 0 || v < 0)
    throw Error(ErrorCode::MalformedHeader,
                path + ": bad hex value for " + what);
  return v;
}

MetaInfo load_meta(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open sidecar: " + path);
  if (meta_line(f, path, "magic") != "HEDB-META v1")
    throw Error(ErrorCode::MalformedHeader,
                path + ": not a table sidecar (bad magic)");

  MetaInfo mi;
  {
    std::istringstream ls(meta_line(f, path, "lambda"));
    if (!(ls >> mi.params.lambda) || mi.params.lambda < 2)
      throw Error(ErrorCode::MalformedHeader, path + ": bad lambda line");
    mi.params.n_bits = mi.params.lambda;
  }
  {
    std::istringstream ls(meta_line(f, path, "parameters"));
    if (!(ls >> mi.params.p_bits >> mi.params.q_bits >> mi.params.alpha >>
          mi.params.beta >> mi.params.frac_bits))
      throw Error(ErrorCode::MalformedHeader, path + ": bad parameter line");
  }
  mi.params.validate();
  {
    std::istringstream ls(meta_line(f, path, "watermark"));
    if (!(ls >> mi.watermark))
      throw Error(ErrorCode::MalformedHeader, path + ": bad watermark line");
  }
  mi.x0 = meta_hex(meta_line(f, path, "x0"), path, "x0");
  mi.y.reserve(mi.params.beta);
  for (unsigned i = 0; i < mi.params.beta; ++i)
    mi.y.push_back(meta_hex(meta_line(f, path, "y"), path, "y"));
  return mi;
}

void write_file_or_throw(const fs::path& path,
                         const std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f)
    throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<uint8_t> read_file_or_throw(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

void rename_or_throw(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::rename(from, to, ec);
  if (ec)
    throw Error(ErrorCode::IoError, "cannot rename " + from.string() +
                                        " to " + to.string() + ": " +
                                        ec.message());
}

uint32_t max_cell_noise(const std::vector<EncryptedRecord>& rows) {
  uint32_t wm = 0;
  for (const EncryptedRecord& rec : rows)
    for (const EncryptedWord& w : rec.words)
      for (const Ciphertext& ct : w.bits) wm = std::max(wm, ct.noise_bits);
  return wm;
}

Frame error_frame(ErrorCode code, const std::string& message) {
  return Frame{MsgType::ErrorReply, build_error(code, message)};
}

Frame ack_frame() { return Frame{MsgType::Result, build_result({})}; }

}  // namespace

Server::Server(ServerOptions opts) : opts_(std::move(opts)) {
  if (opts_.bootstrap_path.empty())
    opts_.bootstrap_path = opts_.data_dir + "/bootstrap.bsk";
}

Server::~Server() { stop(); }

void Server::load() {
  fs::create_directories(opts_.data_dir);
  std::lock_guard<std::mutex> lk(map_mutex_);
  tables_.clear();
  for (const fs::directory_entry& entry :
       fs::directory_iterator(opts_.data_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".tbl")
      continue;
    const std::string name = entry.path().stem().string();
    const fs::path meta_path = fs::path(opts_.data_dir) / (name + ".meta");
    if (!fs::exists(meta_path))
      throw Error(ErrorCode::MalformedHeader,
                  "table '" + name + "' has no .meta sidecar");
    MetaInfo mi = load_meta(meta_path.string());
    auto ctx = std::make_shared<CipherContext>(
        CipherContext{mi.params, std::move(mi.x0), std::move(mi.y)});
    const std::vector<uint8_t> bytes = read_file_or_throw(entry.path());
    auto st = std::make_unique<TableState>();
    st->table =
        parse_table(bytes.data(), bytes.size(), name, ctx, mi.watermark);
    st->watermark = mi.watermark;
    tables_[name] = std::move(st);
  }

  if (opts_.enable_recrypt) {
    try {
      bundle_ = load_bootstrap_bundle(opts_.bootstrap_path);
    } catch (const Error& e) {
      throw Error(ErrorCode::BootstrapUnavailable,
                  "refresh enabled but the bootstrap bundle at " +
                      opts_.bootstrap_path + " is unusable: " + e.what());
    }
  }
}

void Server::persist(const std::string& name, const EncryptedTable& table,
                     uint32_t watermark) {
  const fs::path dir(opts_.data_dir);
  const fs::path tbl = dir / (name + ".tbl");
  const fs::path meta = dir / (name + ".meta");
  const fs::path tbl_tmp = dir / (name + ".tbl.tmp");
  const fs::path meta_tmp = dir / (name + ".meta.tmp");

  const std::vector<uint8_t> bytes = serialize_table(table);
  write_file_or_throw(
      tbl_tmp, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                bytes.size()));

  const SecurityParams& sp = table.ctx->params;
  std::ostringstream m;
  m << "HEDB-META v1\n";
  m << sp.lambda << "\n";
  m << sp.p_bits << " " << sp.q_bits << " " << sp.alpha << " " << sp.beta
    << " " << sp.frac_bits << "\n";
  m << watermark << "\n";
  m << table.ctx->x0.get_str(16) << "\n";
  for (const mpz_class& y : table.ctx->y) m << y.get_str(16) << "\n";
  write_file_or_throw(meta_tmp, m.str());

  if (opts_.fail_before_rename) {
    std::error_code ec;
    fs::remove(tbl_tmp, ec);
    fs::remove(meta_tmp, ec);
    throw Error(ErrorCode::Internal, "failpoint: crash before rename");
  }

  rename_or_throw(meta_tmp, meta);
  rename_or_throw(tbl_tmp, tbl);
}

Server::TableState* Server::find_table(const std::string& name) {
  std::lock_guard<std::mutex> lk(map_mutex_);
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw Error(ErrorCode::UnknownTable, "unknown table '" + name + "'");
  return it->second.get();
}

std::vector<Frame> Server::handle_frame(const Frame& frame) {
  try {
    switch (frame.type) {
      case MsgType::Ping:
        return {Frame{MsgType::Ping, frame.payload}};
      case MsgType::CreateTable:
        return do_create(frame.payload);
      case MsgType::InsertRow:
        return do_insert(frame.payload);
      case MsgType::Query:
        return do_query(frame.payload);
      default:
        throw Error(ErrorCode::UnknownMessageType,
                    "frame type " +
                        std::to_string(static_cast<unsigned>(frame.type)) +
                        " is not a request");
    }
  } catch (const Error& e) {
    return {error_frame(e.code(), e.what())};
  } catch (const std::exception& e) {
    return {error_frame(ErrorCode::Internal, e.what())};
  }
}

std::vector<Frame> Server::do_create(const std::vector<uint8_t>& payload) {
  CreateTableMsg msg = parse_create_table(payload);
  auto ctx = std::make_shared<CipherContext>(
      CipherContext{msg.params, std::move(msg.x0), std::move(msg.y)});

  std::lock_guard<std::mutex> lk(map_mutex_);
  if (tables_.count(msg.schema.table_name))
    throw Error(ErrorCode::DuplicateTable,
                "table '" + msg.schema.table_name + "' already exists");
  auto st = std::make_unique<TableState>();
  st->table.schema = msg.schema;
  st->table.ctx = std::move(ctx);
  persist(msg.schema.table_name, st->table, 0);
  tables_[msg.schema.table_name] = std::move(st);
  return {ack_frame()};
}

std::vector<Frame> Server::do_insert(const std::vector<uint8_t>& payload) {
  std::string name;
  const size_t pos = parse_insert_row_name(payload, name);
  TableState* st = find_table(name);
  std::lock_guard<std::mutex> lk(st->mutex);

  const uint32_t fresh = st->table.ctx->params.n_bits;
  EncryptedRecord rec =
      parse_insert_row(payload, pos, st->table.schema, st->table.ctx, fresh);
  append_row(st->table, std::move(rec));
  const uint32_t wm = std::max(st->watermark, fresh);
  try {
    persist(name, st->table, wm);
  } catch (...) {
    st->table.rows.pop_back();
    throw;
  }
  st->watermark = wm;
  return {ack_frame()};
}

std::vector<Frame> Server::do_query(const std::vector<uint8_t>& payload) {
  CompiledShape shape;
  const size_t pos = parse_query_shape(payload, shape);
  TableState* st = find_table(shape.table);
  std::lock_guard<std::mutex> lk(st->mutex);
  const TableSchema& schema = st->table.schema;

  CompiledQuery cq;
  cq.shape = shape;
  parse_query_operands(payload, pos, shape, st->table.ctx,
                       st->table.ctx->params.n_bits, cq);
  StatementInput in = to_statement_input(std::move(cq), schema);

  ExecOptions eo;
  // Refresh only with a bundle for this table's key; x0 is unique per
  // keygen, so matching x0 means matching key.
  if (bundle_ && bundle_->ctx->x0 == st->table.ctx->x0) {
    eo.refresh_key = &bundle_->bk;
    eo.refresh_threshold = (st->table.ctx->params.p_bits - 2) / 2;
  }

  ExecResult res = execute_statement(st->table, in, eo);

  std::vector<Ciphertext> out;
  switch (shape.kind) {
    case StatementKind::Select:
      out = std::move(res.record.bits);
      break;
    case StatementKind::Count:
      out = std::move(res.count.bits);
      break;
    case StatementKind::Avg:
      out = std::move(res.sum.bits);
      out.insert(out.end(), std::make_move_iterator(res.count.bits.begin()),
                 std::make_move_iterator(res.count.bits.end()));
      break;
    case StatementKind::Update:
    case StatementKind::Delete: {
      EncryptedTable candidate{schema, std::move(res.new_rows),
                               st->table.ctx};
      const uint32_t wm = max_cell_noise(candidate.rows);
      persist(shape.table, candidate, wm);
      st->table = std::move(candidate);
      st->watermark = wm;
      break;
    }
  }

  std::vector<Frame> replies;
  replies.push_back(Frame{MsgType::Result, build_result(out)});
  replies.push_back(Frame{MsgType::Counters, build_counters(res.counters)});
  return replies;
}

void Server::run_connection(Socket sock) {
  const int fd = sock.fd();
  {
    std::lock_guard<std::mutex> lk(conn_mutex_);
    conn_fds_.push_back(fd);
  }
  while (true) {
    std::optional<Frame> frame;
    try {
      frame = read_frame(fd, opts_.max_payload);
    } catch (const Error& e) {
      // Framing is broken: report once, then drop the connection, since
      // the stream position can no longer be trusted.
      try {
        write_frame(fd, MsgType::ErrorReply, build_error(e.code(), e.what()));
      } catch (...) {
      }
      break;
    }
    if (!frame) break;
    bool wrote_ok = true;
    for (const Frame& reply : handle_frame(*frame)) {
      try {
        write_frame(fd, reply.type, reply.payload);
      } catch (...) {
        wrote_ok = false;
        break;
      }
    }
    if (!wrote_ok) break;
  }
  std::lock_guard<std::mutex> lk(conn_mutex_);
  conn_fds_.erase(std::remove(conn_fds_.begin(), conn_fds_.end(), fd),
                  conn_fds_.end());
}

void Server::serve(Socket listener) {
  ::signal(SIGPIPE, SIG_IGN);
  listener_ = std::move(listener);
  running_ = true;
  while (running_) {
    std::optional<Socket> client = accept_client(listener_.fd());
    if (!client) break;
    std::lock_guard<std::mutex> lk(conn_mutex_);
    threads_.emplace_back(&Server::run_connection, this, std::move(*client));
  }
  std::vector<std::thread> drained;
  {
    std::lock_guard<std::mutex> lk(conn_mutex_);
    drained.swap(threads_);
  }
  for (std::thread& t : drained)
    if (t.joinable()) t.join();
}

void Server::stop() {
  running_ = false;
  if (listener_.valid()) ::shutdown(listener_.fd(), SHUT_RDWR);
  std::lock_guard<std::mutex> lk(conn_mutex_);
  for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
}

bool Server::has_table(const std::string& name) const {
  std::lock_guard<std::mutex> lk(map_mutex_);
  return tables_.count(name) > 0;
}

size_t Server::table_rows(const std::string& name) const {
  std::lock_guard<std::mutex> lk(map_mutex_);
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw Error(ErrorCode::UnknownTable, "unknown table '" + name + "'");
  std::lock_guard<std::mutex> tlk(it->second->mutex);
  return it->second->table.rows.size();
}

uint32_t Server::table_watermark(const std::string& name) const {
  std::lock_guard<std::mutex> lk(map_mutex_);
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw Error(ErrorCode::UnknownTable, "unknown table '" + name + "'");
  std::lock_guard<std::mutex> tlk(it->second->mutex);
  return it->second->watermark;
}

}  // namespace hedb
