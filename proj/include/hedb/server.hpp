// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// The blind database server. It stores encrypted tables, evaluates compiled
// statements gate by gate, and persists every mutation atomically — all
// without any key material. The only optional extra input is a key-free
// bootstrap bundle, which lets it refresh ciphertext noise mid-circuit.

#ifndef HEDB_SERVER_HPP
#define HEDB_SERVER_HPP

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hedb/keyfile.hpp"
#include "hedb/net.hpp"
#include "hedb/table.hpp"
#include "hedb/wire.hpp"

namespace hedb {

struct ServerOptions {
  std::string data_dir;
  // When set, queries refresh working ciphertexts whose noise estimate
  // crosses half the budget, using the bundle at bootstrap_path. The bundle
  // holds encrypted secret bits only; the server still never sees a key.
  bool enable_recrypt = false;
  std::string bootstrap_path;  // defaults to data_dir + "/bootstrap.bsk"
  uint32_t max_payload = 256u << 20;
  // Test hook: abort persistence after writing temp files but before any
  // rename, simulating a crash at the worst moment.
  bool fail_before_rename = false;
};

class Server {
 public:
  explicit Server(ServerOptions opts);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Loads every table (and the bootstrap bundle, when refresh is enabled)
  // from data_dir. Creates the directory if needed.
  void load();

  // Processes one request frame and returns the reply frames, converting
  // Error exceptions into ERROR frames. Thread safe; this is the whole
  // request surface, used directly by in-process tests and by serve().
  std::vector<Frame> handle_frame(const Frame& frame);

  // Accept loop: one thread per connection, until stop(). Takes ownership
  // of the listening socket.
  void serve(Socket listener);
  void stop();

  // Introspection for tests and status output.
  bool has_table(const std::string& name) const;
  size_t table_rows(const std::string& name) const;
  uint32_t table_watermark(const std::string& name) const;
  bool refresh_active() const { return bundle_.has_value(); }

 private:
  struct TableState {
    EncryptedTable table;
    uint32_t watermark = 0;  // max noise estimate over stored cells
    mutable std::mutex mutex;
  };

  std::vector<Frame> do_create(const std::vector<uint8_t>& payload);
  std::vector<Frame> do_insert(const std::vector<uint8_t>& payload);
  std::vector<Frame> do_query(const std::vector<uint8_t>& payload);

  TableState* find_table(const std::string& name);
  // Writes <name>.tbl and <name>.meta via temp files and renames; the meta
  // (with its noise watermark) lands first so a crash between the renames
  // can only overstate noise, never understate it.
  void persist(const std::string& name, const EncryptedTable& table,
               uint32_t watermark);
  void run_connection(Socket sock);

  ServerOptions opts_;
  std::optional<BootstrapBundle> bundle_;

  mutable std::mutex map_mutex_;
  std::map<std::string, std::unique_ptr<TableState>> tables_;

  std::mutex conn_mutex_;
  std::vector<int> conn_fds_;
  std::vector<std::thread> threads_;
  Socket listener_;
  std::atomic<bool> running_{false};
};

}  // namespace hedb

#endif  // HEDB_SERVER_HPP
