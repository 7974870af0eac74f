// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal blocking TCP plumbing for the framed protocol: an owning socket,
// frame read/write over a file descriptor, and client/listener helpers.

#ifndef HEDB_NET_HPP
#define HEDB_NET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hedb/wire.hpp"

namespace hedb {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close(); }
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();

 private:
  int fd_ = -1;
};

struct Frame {
  MsgType type = MsgType::Ping;
  std::vector<uint8_t> payload;
};

// Reads one whole frame; nullopt on clean EOF at a frame boundary. Throws
// NetworkError on mid-frame EOF or socket errors, PayloadTooLarge when the
// advertised length exceeds max_payload, and framing errors from the
// header parser.
std::optional<Frame> read_frame(int fd, uint32_t max_payload);

void write_frame(int fd, MsgType type, const std::vector<uint8_t>& payload);

// Client side: connect to host:port (name resolution included).
Socket dial(const std::string& host, uint16_t port);

// Server side: listen on 127.0.0.1:port (0 = kernel-assigned); the chosen
// port is written back to port.
Socket listen_local(uint16_t& port);

// Blocking accept; nullopt when the listener has been closed.
std::optional<Socket> accept_client(int listen_fd);

}  // namespace hedb

#endif  // HEDB_NET_HPP
