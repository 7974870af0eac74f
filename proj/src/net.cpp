// Copyright 2026 the hedb authors
// SPDX-License-Identifier: Apache-2.0

#include "hedb/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "hedb/error.hpp"

namespace hedb {

namespace {

[[noreturn]] void net_fail(const std::string& what) {
  throw Error(ErrorCode::NetworkError, what + ": " + std::strerror(errno));
}

// Reads exactly n bytes. Returns false on EOF before the first byte when
// allow_eof, throws otherwise.
bool read_exact(int fd, uint8_t* buf, size_t n, bool allow_eof) {
  size_t got = 0;
  while (got < n) {
    const ssize_t r = ::read(fd, buf + got, n - got);
    if (r == 0) {
      if (got == 0 && allow_eof) return false;
      throw Error(ErrorCode::NetworkError, "connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      net_fail("read");
    }
    got += static_cast<size_t>(r);
  }
  return true;
}

void write_exact(int fd, const uint8_t* buf, size_t n) {
  size_t sent = 0;
  while (sent < n) {
    const ssize_t r = ::write(fd, buf + sent, n - sent);
    if (r < 0) {
      if (errno == EINTR) continue;
      net_fail("write");
    }
    sent += static_cast<size_t>(r);
  }
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::optional<Frame> read_frame(int fd, uint32_t max_payload) {
  uint8_t header[kFrameHeaderSize];
  if (!read_exact(fd, header, sizeof(header), true)) return std::nullopt;
  const FrameHeader h = parse_frame_header(header);
  if (h.length > max_payload)
    throw Error(ErrorCode::PayloadTooLarge,
                "payload of " + std::to_string(h.length) +
                    " bytes exceeds the limit of " +
                    std::to_string(max_payload));
  Frame frame;
  frame.type = h.type;
  frame.payload.resize(h.length);
  if (h.length > 0) read_exact(fd, frame.payload.data(), h.length, false);
  return frame;
}

void write_frame(int fd, MsgType type, const std::vector<uint8_t>& payload) {
  const std::vector<uint8_t> bytes = build_frame(type, payload);
  write_exact(fd, bytes.data(), bytes.size());
}

Socket dial(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc =
      ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0)
    throw Error(ErrorCode::NetworkError,
                "cannot resolve " + host + ": " + gai_strerror(rc));

  int last_errno = 0;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return Socket(fd);
    }
    last_errno = errno;
    ::close(fd);
  }
  ::freeaddrinfo(res);
  errno = last_errno;
  throw Error(ErrorCode::NetworkError,
              "cannot connect to " + host + ":" + std::to_string(port) + ": " +
                  std::strerror(last_errno));
}

Socket listen_local(uint16_t& port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) net_fail("socket");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    const int saved = errno;
    ::close(fd);
    errno = saved;
    net_fail("bind");
  }
  if (::listen(fd, 16) < 0) {
    const int saved = errno;
    ::close(fd);
    errno = saved;
    net_fail("listen");
  }
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0)
    port = ntohs(addr.sin_port);
  return Socket(fd);
}

std::optional<Socket> accept_client(int listen_fd) {
  while (true) {
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd >= 0) return Socket(fd);
    if (errno == EINTR) continue;
    return std::nullopt;  // listener closed or fatal; caller stops accepting
  }
}

}  // namespace hedb
