// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// hedb-server: the untrusted-side table server.  It stores and evaluates
// ciphertext and is deliberately impossible to hand any key material: there
// is no flag for it, and the refresh bundle it can optionally load contains
// only encrypted secret-key bits.

#include <csignal>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hedb/error.hpp"
#include "hedb/net.hpp"
#include "hedb/server.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"hedb-server: blind encrypted-table server"};
  unsigned port = 0;
  hedb::ServerOptions opts;
  app.add_option("--port", port, "TCP port to listen on (0 picks a free one)")
      ->required()
      ->check(CLI::Range(0u, 65535u));
  app.add_option("--data-dir", opts.data_dir, "table storage directory")
      ->required();
  app.add_flag("--enable-recrypt", opts.enable_recrypt,
               "refresh noisy ciphertexts using <data-dir>/bootstrap.bsk");
  app.add_option("--max-payload", opts.max_payload,
                 "per-frame payload ceiling in bytes")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    hedb::Server server(opts);
    server.load();
    uint16_t bound = static_cast<uint16_t>(port);
    hedb::Socket listener = hedb::listen_local(bound);
    std::cout << "hedb-server listening on 127.0.0.1:" << bound << std::endl;
    if (server.refresh_active())
      std::cout << "ciphertext refresh enabled" << std::endl;
    server.serve(std::move(listener));
    return 0;
  } catch (const hedb::Error& e) {
    std::cerr << "error (" << hedb::error_code_name(e.code())
              << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
