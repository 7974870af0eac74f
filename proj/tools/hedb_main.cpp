// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// hedb: the trusted-side command-line client.

#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hedb/client.hpp"
#include "hedb/error.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"hedb: client for the blind encrypted database"};
  app.require_subcommand(1);

  std::string server = "127.0.0.1:7070";
  std::string key_path = "hedb.key";
  app.add_option("--server", server, "server address as host:port")
      ->capture_default_str();
  app.add_option("--key", key_path, "key file path")->capture_default_str();

  auto* keygen = app.add_subcommand("keygen", "generate a key file");
  unsigned lambda = 0;
  unsigned p_bits = 0;
  std::string out_path;
  keygen->add_option("--lambda", lambda, "security parameter, at least 2")
      ->required();
  keygen->add_option("--out", out_path, "output key file")->required();
  keygen->add_option("--p-bits", p_bits,
                     "override the modulus bit length (default: sized for "
                     "the standard workload envelope)");

  auto* bundle = app.add_subcommand(
      "bundle", "write the key-free refresh bundle a server needs for "
                "--enable-recrypt");
  std::string bundle_out;
  bundle->add_option("--out", bundle_out, "output bundle file")->required();

  auto* create = app.add_subcommand(
      "create-table", "create an encrypted table from a schema file");
  std::string schema_path;
  std::string table_override;
  create
      ->add_option("--schema", schema_path,
                   "schema file, one name:kind:bits per line")
      ->required();
  create->add_option("--table", table_override,
                     "table name (default: schema file stem)");

  auto* insert =
      app.add_subcommand("insert", "encrypt and insert one row");
  std::string insert_table;
  std::vector<std::string> values;
  insert->add_option("table", insert_table, "table name")->required();
  insert->add_option("values", values, "one value per column");

  auto* query = app.add_subcommand("query", "run one SQL statement");
  std::string sql;
  unsigned n = 1;
  query->add_option("sql", sql, "statement text")->required();
  query->add_option("--n", n, "which match a SELECT returns (1-based)")
      ->capture_default_str();

  app.add_subcommand("shell", "interactive query shell");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keygen->parsed()) {
      hedb::cmd_keygen(lambda, out_path, p_bits, std::cout);
      return 0;
    }
    if (bundle->parsed()) {
      hedb::cmd_bundle(key_path, bundle_out, std::cout);
      return 0;
    }

    hedb::ClientConfig cfg;
    cfg.server = server;
    cfg.key_path = key_path;
    hedb::Client client(cfg);
    if (create->parsed()) {
      client.create_table(schema_path, table_override, std::cout);
    } else if (insert->parsed()) {
      client.insert(insert_table, values, std::cout);
    } else if (query->parsed()) {
      client.query(sql, n, std::cout);
    } else {
      client.shell(std::cin, std::cout);
    }
    return 0;
  } catch (const hedb::Error& e) {
    std::cerr << "error (" << hedb::error_code_name(e.code()) << ")";
    if (e.offset()) std::cerr << " at byte " << *e.offset();
    std::cerr << ": " << e.what() << "\n";
    if (query->parsed() && e.offset() && *e.offset() <= sql.size())
      std::cerr << "  " << sql << "\n  " << std::string(*e.offset(), ' ')
                << "^\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
