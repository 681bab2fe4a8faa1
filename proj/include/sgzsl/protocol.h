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

#ifndef SGZSL_PROTOCOL_H_
#define SGZSL_PROTOCOL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sgzsl/feedback.h"
#include "sgzsl/matrix.h"

namespace sgzsl {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxPayloadBytes = 64u << 20;

enum class MessageType {
  kHello,
  kHelloAck,
  kUploadBatch,
  kWhiteboxFeedback,
  kBlackboxFeedback,
  kError,
};

std::string MessageTypeName(MessageType type);

// Handshake contents. The provider fills protocol/feature_dim/num_classes;
// the sentinel echoes them in HelloAck with alpha, budget and the classes it
// will answer for.
struct HelloPayload {
  ProtocolKind protocol = ProtocolKind::kWhitebox;
  std::uint64_t feature_dim = 0;
  std::uint64_t num_classes = 0;
  double alpha = 0.0;
  std::optional<std::uint64_t> budget;  // Absent: unlimited.
  std::vector<int> classes;

  bool operator==(const HelloPayload&) const = default;
};

// Generated features only; there is no variant that can carry dataset rows.
struct UploadBatchPayload {
  Matrix features;
  std::vector<int> labels;

  bool operator==(const UploadBatchPayload&) const = default;
};

struct ErrorPayload {
  std::string code;  // "budget_exceeded", "protocol_mismatch", "bad_request"
  std::string message;

  bool operator==(const ErrorPayload&) const = default;
};

struct WireMessage {
  MessageType type = MessageType::kHello;
  std::string session;
  std::uint64_t seq = 0;
  std::variant<HelloPayload, UploadBatchPayload, FeedbackMessage, ErrorPayload>
      payload;

  // Field name -> risk tag for every payload field that leaves a party.
  std::vector<std::pair<std::string, Risk>> FieldRisks() const;
  bool HasMidRiskField() const;

  bool operator==(const WireMessage&) const = default;
};

WireMessage MakeHello(std::string session, std::uint64_t seq,
                      HelloPayload hello);
WireMessage MakeHelloAck(std::string session, std::uint64_t seq,
                         HelloPayload hello);
WireMessage MakeUpload(std::string session, std::uint64_t seq, Matrix features,
                       std::vector<int> labels);
WireMessage MakeFeedback(std::string session, std::uint64_t seq,
                         FeedbackMessage feedback);
WireMessage MakeError(std::string session, std::uint64_t seq, std::string code,
                      std::string message);

// 4-byte big-endian length, then a UTF-8 JSON object with keys in the order
// v, type, session, seq, payload. Doubles use shortest round-trip form.
std::vector<std::uint8_t> Encode(const WireMessage& msg);

// Inverse of Encode. Throws ProtocolError on framing problems,
// ProtocolVersionError on unknown versions or type tags, and SchemaError
// (naming the field) on missing or mistyped fields.
WireMessage Decode(std::span<const std::uint8_t> frame);

// JSON body only (no length prefix); exposed for inspection and bindings.
std::string EncodeJson(const WireMessage& msg);
WireMessage DecodeJson(const std::string& json);

// Rejects a message whose sequence number does not exceed the last one seen
// in the same session.
class SequenceGuard {
 public:
  void Check(const WireMessage& msg);
  std::optional<std::uint64_t> last(const std::string& session) const;

 private:
  std::map<std::string, std::uint64_t> last_;
};

}  // namespace sgzsl

#endif  // SGZSL_PROTOCOL_H_
