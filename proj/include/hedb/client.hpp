// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// The trusted-side client: key generation, schema management, row
// encryption, query compilation, result decryption, and the interactive
// shell. Everything that touches a secret key lives here or in the test
// harness — never in the server.

#ifndef HEDB_CLIENT_HPP
#define HEDB_CLIENT_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hedb/estimate.hpp"
#include "hedb/keyfile.hpp"
#include "hedb/net.hpp"
#include "hedb/sql.hpp"
#include "hedb/wire.hpp"

namespace hedb {

struct ClientConfig {
  std::string server = "127.0.0.1:7070";
  std::string key_path;
  uint32_t max_payload = 256u << 20;
};

// "host:port" -> parts. Throws Error(NetworkError) on a malformed address.
void split_server_address(const std::string& server, std::string& host,
                          uint16_t& port);

// Key generation, the only keyless command. The default modulus is sized
// so every statement within the standard workload envelope decrypts;
// p_bits_override (0 = off) widens or narrows it explicitly.
void cmd_keygen(unsigned lambda, const std::string& out_path,
                unsigned p_bits_override, std::ostream& out);

// Writes the key-free refresh bundle a server needs for --enable-recrypt.
void cmd_bundle(const std::string& key_path, const std::string& out_path,
                std::ostream& out);

class Client {
 public:
  // Loads the key file; connects on first use.
  explicit Client(ClientConfig cfg);

  void create_table(const std::string& schema_path,
                    const std::string& table_name_override, std::ostream& out);
  void insert(const std::string& table,
              const std::vector<std::string>& values, std::ostream& out);

  struct QueryOutcome {
    QueryAst ast;
    OpCounters counters;
    bool no_match = false;  // SELECT decrypted to all zeros
  };
  // Full path: parse, validate, estimate (refusing undecryptable results),
  // compile, send, decrypt, render.
  QueryOutcome query(const std::string& sql, unsigned n, std::ostream& out);

  void shell(std::istream& in, std::ostream& out);

  const KeySet& keys() const { return keys_; }

 private:
  struct TableCache {
    TableSchema schema;
    uint32_t watermark = 0;  // noise upper bound over the stored cells
    unsigned rows = 0;
  };

  std::string cache_dir() const;
  void save_cache(const TableCache& cache);
  TableCache load_cache(const std::string& table);

  int connection();
  // Sends one frame and reads one reply; ERROR replies become exceptions.
  Frame request_one(MsgType type, const std::vector<uint8_t>& payload);
  // QUERY round trip: RESULT payload plus COUNTERS.
  std::pair<std::vector<uint8_t>, OpCounters> request_query(
      const std::vector<uint8_t>& payload);

  ClientConfig cfg_;
  KeySet keys_;
  Rng rng_;
  Socket sock_;
};

}  // namespace hedb

#endif  // HEDB_CLIENT_HPP
