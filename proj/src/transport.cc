// Copyright 2026 The sgzsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sgzsl/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "sgzsl/errors.h"
#include "sgzsl/protocol.h"

namespace sgzsl {
namespace {

std::string Errno(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

// Returns the number of bytes read before EOF.
std::size_t ReadFully(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r == 0) break;
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(Errno("recv"));
    }
    got += static_cast<std::size_t>(r);
  }
  return got;
}

sockaddr_in Resolve(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr) {
    throw ConnectionError("cannot resolve host '" + host +
                          "': " + ::gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  ::freeaddrinfo(res);
  addr.sin_port = htons(port);
  return addr;
}

}  // namespace

SocketChannel::SocketChannel(int fd) : fd_(fd) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

SocketChannel::~SocketChannel() { Close(); }

SocketChannel::SocketChannel(SocketChannel&& other) noexcept
    : fd_(other.fd_) {
  other.fd_ = -1;
}

SocketChannel& SocketChannel::operator=(SocketChannel&& other) noexcept {
  if (this != &other) {
    Close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void SocketChannel::Close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void SocketChannel::Send(std::span<const std::uint8_t> frame) {
  if (fd_ < 0) throw ConnectionError("send on a closed channel");
  std::size_t sent = 0;
  while (sent < frame.size()) {
    const ssize_t r =
        ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(Errno("send"));
    }
    sent += static_cast<std::size_t>(r);
  }
}

std::optional<Frame> SocketChannel::Receive() {
  if (fd_ < 0) throw ConnectionError("receive on a closed channel");
  Frame frame(4);
  const std::size_t head = ReadFully(fd_, frame.data(), 4);
  if (head == 0) return std::nullopt;
  if (head < 4) throw ConnectionError("connection closed inside a length prefix");
  const std::uint32_t n = (std::uint32_t{frame[0]} << 24) |
                          (std::uint32_t{frame[1]} << 16) |
                          (std::uint32_t{frame[2]} << 8) |
                          std::uint32_t{frame[3]};
  if (n > kMaxPayloadBytes) {
    throw ProtocolError("declared length " + std::to_string(n) +
                        " exceeds the 64 MiB limit");
  }
  frame.resize(4 + std::size_t{n});
  if (ReadFully(fd_, frame.data() + 4, n) < n) {
    throw ConnectionError("connection closed inside a frame");
  }
  return frame;
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ConnectionError(Errno("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = Resolve(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    const std::string msg = Errno("bind " + host + ":" + std::to_string(port));
    ::close(fd_);
    throw ConnectionError(msg);
  }
  if (::listen(fd_, 1) < 0) {
    const std::string msg = Errno("listen");
    ::close(fd_);
    throw ConnectionError(msg);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

SocketChannel TcpListener::Accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return SocketChannel(fd);
    if (errno != EINTR) throw ConnectionError(Errno("accept"));
  }
}

SocketChannel ConnectTcp(const std::string& host, std::uint16_t port,
                         int attempts, std::chrono::milliseconds delay) {
  const sockaddr_in addr = Resolve(host, port);
  std::string last_error = "no attempts made";
  for (int i = 0; i < attempts; ++i) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ConnectionError(Errno("socket"));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr),
                  sizeof(addr)) == 0) {
      return SocketChannel(fd);
    }
    last_error = Errno("connect");
    ::close(fd);
    std::this_thread::sleep_for(delay);
  }
  throw ConnectionError(last_error + " (" + host + ":" +
                        std::to_string(port) + ")");
}

}  // namespace sgzsl
