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

#ifndef SGZSL_TRANSPORT_H_
#define SGZSL_TRANSPORT_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgzsl {

using Frame = std::vector<std::uint8_t>;

// A bidirectional, ordered stream of length-prefixed frames.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void Send(std::span<const std::uint8_t> frame) = 0;
  // nullopt when the peer has closed the channel between frames.
  virtual std::optional<Frame> Receive() = 0;
};

// Owns a connected stream socket.
class SocketChannel : public Channel {
 public:
  explicit SocketChannel(int fd);
  ~SocketChannel() override;
  SocketChannel(SocketChannel&& other) noexcept;
  SocketChannel& operator=(SocketChannel&& other) noexcept;
  SocketChannel(const SocketChannel&) = delete;
  SocketChannel& operator=(const SocketChannel&) = delete;

  void Send(std::span<const std::uint8_t> frame) override;
  std::optional<Frame> Receive() override;
  void Close();

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  // Port 0 binds an ephemeral port; read it back with port().
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  SocketChannel Accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Retries while the server is still coming up.
SocketChannel ConnectTcp(const std::string& host, std::uint16_t port,
                         int attempts = 50,
                         std::chrono::milliseconds delay =
                             std::chrono::milliseconds(100));

}  // namespace sgzsl

#endif  // SGZSL_TRANSPORT_H_
