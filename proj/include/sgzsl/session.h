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

#ifndef SGZSL_SESSION_H_
#define SGZSL_SESSION_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgzsl/feedback.h"
#include "sgzsl/matrix.h"
#include "sgzsl/protocol.h"
#include "sgzsl/transport.h"

namespace sgzsl {

class Sentinel;

enum class Direction { kToSentinel, kToProvider };

struct SessionLogEntry {
  std::uint64_t seq = 0;
  MessageType type = MessageType::kHello;
  Direction direction = Direction::kToSentinel;
  std::size_t bytes = 0;
  std::vector<std::pair<std::string, Risk>> risks;

  bool operator==(const SessionLogEntry&) const = default;
};

// Every frame exchanged in one session, in order. No timestamps, so logs from
// two transports compare equal when the traffic is the same.
class SessionLog {
 public:
  void Record(const WireMessage& msg, Direction direction, std::size_t bytes);

  const std::vector<SessionLogEntry>& entries() const { return entries_; }
  std::size_t uploaded_bytes() const;
  std::size_t downloaded_bytes() const;
  std::size_t feedback_bytes() const;
  std::size_t CountType(MessageType type) const;
  std::size_t feedback_count() const;
  std::size_t mid_risk_fields() const;

  // One JSON object per line, then a summary line.
  std::string ToJsonLines() const;
  void Save(const std::filesystem::path& path) const;

  bool operator==(const SessionLog&) const = default;

 private:
  std::vector<SessionLogEntry> entries_;
};

// Sentinel side of a session: decodes each request, answers it and encodes
// the reply. Requests are handled strictly one at a time.
class SentinelEndpoint {
 public:
  SentinelEndpoint(Sentinel& sentinel, ProtocolKind protocol);

  // Returns the reply frame. After an Error reply the session is finished.
  Frame Handle(std::span<const std::uint8_t> frame);
  bool finished() const { return finished_; }

  // Runs until the peer disconnects or the session finishes.
  void Serve(Channel& channel);

 private:
  Frame Reply(const WireMessage& msg);
  Frame Fail(const std::string& session, const std::string& code,
             const std::string& message);

  Sentinel& sentinel_;
  ProtocolKind protocol_;
  SequenceGuard guard_;
  bool greeted_ = false;
  bool finished_ = false;
  std::string session_;
  std::uint64_t last_seq_ = 0;
};

// Synchronous in-memory transport: Send dispatches to the endpoint and queues
// its reply for the next Receive.
class InProcessChannel : public Channel {
 public:
  explicit InProcessChannel(SentinelEndpoint& endpoint)
      : endpoint_(endpoint) {}
  void Send(std::span<const std::uint8_t> frame) override;
  std::optional<Frame> Receive() override;

 private:
  SentinelEndpoint& endpoint_;
  std::optional<Frame> pending_;
};

// What the provider can ask of the data owner. Implementations only ever
// return FeedbackMessages; nothing else crosses this interface.
class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  virtual FeedbackMessage Request(const Matrix& generated,
                                  std::span<const int> labels) = 0;
};

// Provider side of a session over any Channel.
class RemoteSentinel : public FeedbackSource {
 public:
  RemoteSentinel(Channel& channel, std::string session);

  // Sends Hello and returns the sentinel's HelloAck. Throws ProtocolError if
  // the sentinel rejects the handshake.
  HelloPayload Handshake(const HelloPayload& hello);

  // Throws BudgetExceeded once the sentinel refuses further requests.
  FeedbackMessage Request(const Matrix& generated,
                          std::span<const int> labels) override;

  const SessionLog& log() const { return log_; }
  const std::optional<HelloPayload>& ack() const { return ack_; }

 private:
  WireMessage RoundTrip(const WireMessage& msg);

  Channel& channel_;
  std::string session_;
  std::uint64_t next_seq_ = 0;
  SequenceGuard guard_;
  SessionLog log_;
  std::optional<HelloPayload> ack_;
  bool closed_ = false;
};

}  // namespace sgzsl

#endif  // SGZSL_SESSION_H_
