// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/client.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hedb/error.hpp"

namespace fs = std::filesystem;

namespace hedb {

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << text;
  f.close();
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + path);
}

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void render_text_table(std::ostream& out,
                       const std::vector<std::string>& head,
                       const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width(head.size());
  for (size_t i = 0; i < head.size(); ++i) width[i] = head[i].size();
  for (const auto& row : rows)
    for (size_t i = 0; i < row.size() && i < width.size(); ++i)
      width[i] = std::max(width[i], row[i].size());

  const auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      out << cells[i];
      if (i + 1 < cells.size())
        out << std::string(width[i] - cells[i].size() + 2, ' ');
    }
    out << "\n";
  };
  line(head);
  std::vector<std::string> dashes;
  dashes.reserve(head.size());
  for (size_t w : width) dashes.push_back(std::string(w, '-'));
  line(dashes);
  for (const auto& row : rows) line(row);
}

std::string two_decimals(uint64_t sum, uint64_t count) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f",
                static_cast<double>(sum) / static_cast<double>(count));
  return buf;
}

PlainValue parse_cell_value(const std::string& text, const ColumnSpec& col) {
  if (col.kind == ColumnKind::Uint) {
    uint64_t v = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v, 10);
    if (ec == std::errc::result_out_of_range)
      throw Error(ErrorCode::ValueOverflow,
                  "value for column '" + col.name + "' is out of range");
    if (ec != std::errc() || ptr != end || text.empty())
      throw Error(ErrorCode::TypeMismatch,
                  "column '" + col.name + "' expects an unsigned integer, "
                  "got '" + text + "'");
    return PlainValue::of_uint(v);
  }
  return PlainValue::of_string(text);
}

}  // namespace

void split_server_address(const std::string& server, std::string& host,
                          uint16_t& port) {
  const size_t colon = server.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == server.size())
    throw Error(ErrorCode::NetworkError,
                "server address must be host:port, got '" + server + "'");
  host = server.substr(0, colon);
  unsigned long p = 0;
  try {
    p = std::stoul(server.substr(colon + 1));
  } catch (const std::exception&) {
    p = 0;
  }
  if (p == 0 || p > 65535)
    throw Error(ErrorCode::NetworkError,
                "bad port in server address '" + server + "'");
  port = static_cast<uint16_t>(p);
}

void cmd_keygen(unsigned lambda, const std::string& out_path,
                unsigned p_bits_override, std::ostream& out) {
  SecurityParams params;
  if (p_bits_override > 0) {
    params = SecurityParams::from_lambda(lambda);
    params.p_bits = p_bits_override;
    params.validate();
  } else {
    params = SecurityParams::for_budget(lambda, workload_noise(lambda));
  }
  Rng rng(default_seed());
  KeySet keys = keygen(params, rng);
  save_key_file(keys, out_path);
  out << "wrote " << out_path << "\n";
  out << "lambda=" << params.lambda << " p_bits=" << params.p_bits
      << " q_bits=" << params.q_bits << " alpha=" << params.alpha
      << " beta=" << params.beta << " frac_bits=" << params.frac_bits << "\n";
  out << "noise budget: query estimates must stay below "
      << params.noise_limit() << " bits\n";
}

void cmd_bundle(const std::string& key_path, const std::string& out_path,
                std::ostream& out) {
  KeySet keys = load_key_file(key_path);
  Rng rng(default_seed());
  BootstrapKey bk = make_bootstrap_key(keys, rng);
  save_bootstrap_bundle(keys, bk, out_path);
  out << "wrote " << out_path << " (key-free refresh bundle, "
      << bk.enc_s.size() << " encrypted secret bits)\n";
}

Client::Client(ClientConfig cfg)
    : cfg_(std::move(cfg)),
      keys_(load_key_file(cfg_.key_path)),
      rng_(default_seed()) {}

std::string Client::cache_dir() const { return cfg_.key_path + ".tables"; }

void Client::save_cache(const TableCache& cache) {
  fs::create_directories(cache_dir());
  const std::string base = cache_dir() + "/" + cache.schema.table_name;
  write_text_file(base + ".schema", schema_to_text(cache.schema));
  std::ostringstream st;
  st << cache.watermark << " " << cache.rows << "\n";
  write_text_file(base + ".state", st.str());
}

Client::TableCache Client::load_cache(const std::string& table) {
  const std::string base = cache_dir() + "/" + table;
  if (!fs::exists(base + ".schema"))
    throw Error(ErrorCode::UnknownTable,
                "no local schema for table '" + table +
                    "'; run create-table first (the client keeps schemas "
                    "beside its key file)");
  TableCache cache;
  cache.schema = parse_schema_text(read_text_file(base + ".schema"), table);
  cache.schema.validate();
  // Without the state file, fall back to the most conservative view.
  cache.watermark = keys_.params.n_bits;
  cache.rows = kMaxRows;
  if (fs::exists(base + ".state")) {
    std::istringstream st(read_text_file(base + ".state"));
    uint32_t wm = 0;
    unsigned rows = 0;
    if (st >> wm >> rows) {
      cache.watermark = wm;
      cache.rows = rows;
    }
  }
  return cache;
}

int Client::connection() {
  if (!sock_.valid()) {
    std::string host;
    uint16_t port = 0;
    split_server_address(cfg_.server, host, port);
    sock_ = dial(host, port);
  }
  return sock_.fd();
}

Frame Client::request_one(MsgType type, const std::vector<uint8_t>& payload) {
  const int fd = connection();
  write_frame(fd, type, payload);
  std::optional<Frame> reply = read_frame(fd, cfg_.max_payload);
  if (!reply) {
    sock_.close();
    throw Error(ErrorCode::NetworkError, "server closed the connection");
  }
  if (reply->type == MsgType::ErrorReply) {
    const WireError we = parse_error(reply->payload);
    throw Error(we.code, "server: " + we.message);
  }
  return std::move(*reply);
}

std::pair<std::vector<uint8_t>, OpCounters> Client::request_query(
    const std::vector<uint8_t>& payload) {
  Frame result = request_one(MsgType::Query, payload);
  if (result.type != MsgType::Result)
    throw Error(ErrorCode::MalformedFrame,
                "expected a RESULT reply to a query");
  std::optional<Frame> counters = read_frame(connection(), cfg_.max_payload);
  if (!counters) {
    sock_.close();
    throw Error(ErrorCode::NetworkError, "server closed the connection");
  }
  if (counters->type == MsgType::ErrorReply) {
    const WireError we = parse_error(counters->payload);
    throw Error(we.code, "server: " + we.message);
  }
  if (counters->type != MsgType::Counters)
    throw Error(ErrorCode::MalformedFrame,
                "expected a COUNTERS reply after the result");
  return {std::move(result.payload), parse_counters(counters->payload)};
}

void Client::create_table(const std::string& schema_path,
                          const std::string& table_name_override,
                          std::ostream& out) {
  const std::string name = table_name_override.empty()
                               ? fs::path(schema_path).stem().string()
                               : table_name_override;
  TableSchema schema =
      parse_schema_text(read_text_file(schema_path), name);
  schema.validate();

  request_one(MsgType::CreateTable, build_create_table(schema, *keys_.ctx));

  TableCache cache;
  cache.schema = schema;
  cache.watermark = 0;
  cache.rows = 0;
  save_cache(cache);
  out << "created table '" << name << "' (" << schema.columns.size()
      << " columns, " << schema.record_bits() << " record bits)\n";
}

void Client::insert(const std::string& table,
                    const std::vector<std::string>& values,
                    std::ostream& out) {
  TableCache cache = load_cache(table);
  if (values.size() != cache.schema.columns.size())
    throw Error(ErrorCode::WidthMismatch,
                "table '" + table + "' has " +
                    std::to_string(cache.schema.columns.size()) +
                    " columns, got " + std::to_string(values.size()) +
                    " values");
  std::vector<PlainValue> row;
  row.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i)
    row.push_back(parse_cell_value(values[i], cache.schema.columns[i]));

  // Encrypts locally; an oversize value throws here and nothing is sent.
  EncryptedRecord rec = encrypt_record(row, cache.schema, keys_, rng_);
  request_one(MsgType::InsertRow, build_insert_row(table, rec));

  cache.rows += 1;
  cache.watermark = std::max(cache.watermark, keys_.params.n_bits);
  save_cache(cache);
  out << "inserted row " << cache.rows << " into '" << table << "'\n";
}

Client::QueryOutcome Client::query(const std::string& sql, unsigned n,
                                   std::ostream& out) {
  QueryAst ast = parse_query(sql);
  TableCache cache = load_cache(ast.table);
  ValidatedQuery vq = validate_query(ast, cache.schema);

  // Replay the exact circuit over noise estimates before sending anything;
  // an undecryptable result is refused here, not discovered afterwards.
  StatementShape shape;
  shape.kind = vq.ast.kind;
  shape.op = vq.op;
  shape.rows = cache.rows;
  shape.operand_bits = cache.schema.columns[vq.column_index].bit_width;
  shape.record_bits = cache.schema.record_bits();
  if (vq.op == PredOp::Pattern) {
    shape.pattern_chars = static_cast<unsigned>(vq.pattern.mask.size());
    for (uint8_t m : vq.pattern.mask) shape.pattern_literals += m ? 1u : 0u;
    shape.prefix_only = vq.pattern.prefix_only;
  }
  if (vq.ast.kind == StatementKind::Avg)
    shape.avg_bits = cache.schema.columns[vq.avg_column_index].bit_width;
  shape.cell_noise = cache.watermark;
  const StatementEstimate est = estimate_statement(keys_.params, shape);
  const uint32_t limit = keys_.params.noise_limit();
  if (est.out_noise >= limit)
    throw Error(ErrorCode::NoiseOverflow,
                "refusing to send: the result would carry about " +
                    std::to_string(est.out_noise) +
                    " noise bits, at or past this key's ceiling of " +
                    std::to_string(limit) +
                    "; regenerate keys with a larger --lambda or --p-bits, "
                    "or query narrower columns");

  CompiledQuery cq = compile_query(vq, cache.schema, n, keys_, rng_);
  auto [result_payload, counters] = request_query(build_query(cq));
  std::vector<Ciphertext> cts =
      parse_result(result_payload, keys_.ctx, est.out_noise);

  QueryOutcome outcome;
  outcome.ast = ast;
  outcome.counters = counters;

  std::vector<uint8_t> bits;
  bits.reserve(cts.size());
  try {
    for (const Ciphertext& ct : cts)
      bits.push_back(static_cast<uint8_t>(decrypt_bit(ct, keys_.sk)));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoiseOverflow)
      throw Error(ErrorCode::NoiseOverflow,
                  std::string(e.what()) +
                      "; regenerate keys with a larger --lambda or --p-bits");
    throw;
  }

  switch (ast.kind) {
    case StatementKind::Select: {
      if (bits.size() != cache.schema.record_bits())
        throw Error(ErrorCode::ShapeMismatch,
                    "result width does not match the schema");
      bool any = false;
      for (uint8_t b : bits) any = any || b;
      if (!any) {
        out << "(no match)\n";
        outcome.no_match = true;
        break;
      }
      std::vector<std::string> head;
      std::vector<std::string> row;
      size_t off = 0;
      for (const ColumnSpec& col : cache.schema.columns) {
        const std::vector<uint8_t> slice(bits.begin() + off,
                                         bits.begin() + off + col.bit_width);
        row.push_back(decode_value_bits(slice, col).display());
        head.push_back(col.name);
        off += col.bit_width;
      }
      render_text_table(out, head, {row});
      break;
    }
    case StatementKind::Count: {
      if (bits.size() != kCounterBits)
        throw Error(ErrorCode::ShapeMismatch,
                    "counter result has the wrong width");
      render_text_table(out, {"count"},
                        {{std::to_string(decode_uint_bits(bits))}});
      break;
    }
    case StatementKind::Avg: {
      const unsigned sum_w = sum_result_width(shape.avg_bits);
      if (bits.size() != sum_w + kCounterBits)
        throw Error(ErrorCode::ShapeMismatch,
                    "aggregate result has the wrong width");
      const std::vector<uint8_t> sum_bits(bits.begin(), bits.begin() + sum_w);
      const std::vector<uint8_t> cnt_bits(bits.begin() + sum_w, bits.end());
      const uint64_t sum = decode_uint_bits(sum_bits);
      const uint64_t count = decode_uint_bits(cnt_bits);
      if (count == 0) {
        out << "(no match)\n";
        outcome.no_match = true;
        break;
      }
      render_text_table(out, {"avg(" + ast.target_column + ")"},
                        {{two_decimals(sum, count)}});
      break;
    }
    case StatementKind::Update:
    case StatementKind::Delete: {
      out << "ok\n";
      cache.watermark = est.out_noise;
      save_cache(cache);
      break;
    }
  }
  return outcome;
}

void Client::shell(std::istream& in, std::ostream& out) {
  std::optional<std::string> last_select;
  unsigned last_n = 1;
  std::optional<QueryAst> last_pred;
  OpCounters last_ops;
  bool have_ops = false;

  const auto run = [&](const std::string& sql,
                       unsigned n) -> std::optional<QueryOutcome> {
    try {
      QueryOutcome oc = query(sql, n, out);
      last_ops = oc.counters;
      have_ops = true;
      return oc;
    } catch (const Error& e) {
      out << "error (" << error_code_name(e.code()) << ")";
      if (e.offset()) out << " at byte " << *e.offset();
      out << ": " << e.what() << "\n";
      if (e.offset() && *e.offset() <= sql.size())
        out << "  " << sql << "\n  " << std::string(*e.offset(), ' ') << "^\n";
      if (e.code() == ErrorCode::NetworkError) sock_.close();
      return std::nullopt;
    }
  };

  std::string line;
  out << "hedb> " << std::flush;
  while (std::getline(in, line)) {
    const std::string cmd = trimmed(line);
    if (cmd.empty()) {
      out << "hedb> " << std::flush;
      continue;
    }
    if (cmd == "\\quit") break;
    if (cmd == "\\ops") {
      if (have_ops)
        out << last_ops.additions << " " << last_ops.multiplications << " "
            << last_ops.recrypts << "\n";
      else
        out << "no query yet\n";
    } else if (cmd == "\\next") {
      if (!last_select) {
        out << "no previous SELECT\n";
      } else {
        ++last_n;
        run(*last_select, last_n);
      }
    } else if (cmd == "\\count") {
      if (!last_pred) {
        out << "no previous predicate\n";
      } else {
        QueryAst count_ast;
        count_ast.kind = StatementKind::Count;
        count_ast.table = last_pred->table;
        count_ast.pred = last_pred->pred;
        run(render_query(count_ast), 1);
      }
    } else if (cmd[0] == '\\') {
      out << "unknown command '" << cmd
          << "'; available: \\count \\next \\ops \\quit\n";
    } else {
      std::optional<QueryOutcome> oc = run(cmd, 1);
      if (oc) {
        last_pred = oc->ast;
        if (oc->ast.kind == StatementKind::Select) {
          last_select = cmd;
          last_n = 1;
        }
      }
    }
    out << "hedb> " << std::flush;
  }
}

}  // namespace hedb
