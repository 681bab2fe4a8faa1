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

#include "sgzsl/session.h"

#include <fstream>

#include "json.hpp"
#include "sgzsl/errors.h"
#include "sgzsl/sentinel.h"
#include "spdlog/spdlog.h"

namespace sgzsl {
namespace {

const char* DirectionName(Direction d) {
  return d == Direction::kToSentinel ? "to_sentinel" : "to_provider";
}

bool IsFeedback(MessageType type) {
  return type == MessageType::kWhiteboxFeedback ||
         type == MessageType::kBlackboxFeedback;
}

}  // namespace

void SessionLog::Record(const WireMessage& msg, Direction direction,
                        std::size_t bytes) {
  entries_.push_back({msg.seq, msg.type, direction, bytes, msg.FieldRisks()});
}

std::size_t SessionLog::uploaded_bytes() const {
  std::size_t total = 0;
  for (const auto& e : entries_) {
    if (e.direction == Direction::kToSentinel) total += e.bytes;
  }
  return total;
}

std::size_t SessionLog::downloaded_bytes() const {
  std::size_t total = 0;
  for (const auto& e : entries_) {
    if (e.direction == Direction::kToProvider) total += e.bytes;
  }
  return total;
}

std::size_t SessionLog::feedback_bytes() const {
  std::size_t total = 0;
  for (const auto& e : entries_) {
    if (IsFeedback(e.type)) total += e.bytes;
  }
  return total;
}

std::size_t SessionLog::CountType(MessageType type) const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.type == type;
  return n;
}

std::size_t SessionLog::feedback_count() const {
  return CountType(MessageType::kWhiteboxFeedback) +
         CountType(MessageType::kBlackboxFeedback);
}

std::size_t SessionLog::mid_risk_fields() const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    for (const auto& [name, risk] : e.risks) n += risk == Risk::kMid;
  }
  return n;
}

std::string SessionLog::ToJsonLines() const {
  std::string out;
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["seq"] = e.seq;
    j["type"] = MessageTypeName(e.type);
    j["direction"] = DirectionName(e.direction);
    j["bytes"] = e.bytes;
    nlohmann::ordered_json risk = nlohmann::ordered_json::object();
    for (const auto& [name, r] : e.risks) risk[name] = RiskName(r);
    j["risk"] = risk;
    out += j.dump();
    out += '\n';
  }
  nlohmann::ordered_json summary;
  summary["messages"] = entries_.size();
  summary["feedback_messages"] = feedback_count();
  summary["uploaded_bytes"] = uploaded_bytes();
  summary["downloaded_bytes"] = downloaded_bytes();
  summary["mid_risk_fields"] = mid_risk_fields();
  nlohmann::ordered_json wrap;
  wrap["summary"] = summary;
  out += wrap.dump();
  out += '\n';
  return out;
}

void SessionLog::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write session log " + path.string());
  out << ToJsonLines();
}

SentinelEndpoint::SentinelEndpoint(Sentinel& sentinel, ProtocolKind protocol)
    : sentinel_(sentinel), protocol_(protocol) {}

Frame SentinelEndpoint::Reply(const WireMessage& msg) {
  guard_.Check(msg);
  last_seq_ = msg.seq;
  return Encode(msg);
}

Frame SentinelEndpoint::Fail(const std::string& session,
                             const std::string& code,
                             const std::string& message) {
  finished_ = true;
  spdlog::warn("sentinel: {} ({})", code, message);
  return Encode(MakeError(session, last_seq_ + 1, code, message));
}

Frame SentinelEndpoint::Handle(std::span<const std::uint8_t> frame) {
  if (finished_) {
    return Fail(session_, "session_closed", "session already finished");
  }
  WireMessage msg;
  try {
    msg = Decode(frame);
  } catch (const ProtocolError& e) {
    return Fail(session_, "bad_request", e.what());
  }
  if (greeted_ && msg.session != session_) {
    return Fail(session_, "bad_request", "unknown session " + msg.session);
  }
  try {
    guard_.Check(msg);
  } catch (const OrderingError& e) {
    return Fail(msg.session, "out_of_order", e.what());
  }
  last_seq_ = msg.seq;

  switch (msg.type) {
    case MessageType::kHello: {
      if (greeted_) return Fail(session_, "bad_request", "duplicate Hello");
      const auto& hello = std::get<HelloPayload>(msg.payload);
      session_ = msg.session;
      if (hello.protocol != protocol_) {
        return Fail(session_, "protocol_mismatch",
                    "sentinel serves " + ProtocolName(protocol_) +
                        ", provider asked for " +
                        ProtocolName(hello.protocol));
      }
      if (hello.feature_dim != sentinel_.feature_dim() ||
          hello.num_classes != sentinel_.num_classes()) {
        return Fail(session_, "bad_request",
                    "task dimensions do not match the sentinel's teacher");
      }
      greeted_ = true;
      HelloPayload ack;
      ack.protocol = protocol_;
      ack.feature_dim = sentinel_.feature_dim();
      ack.num_classes = sentinel_.num_classes();
      ack.alpha = sentinel_.alpha();
      ack.budget = sentinel_.remaining_budget();
      ack.classes = sentinel_.classes();
      return Reply(MakeHelloAck(session_, msg.seq + 1, std::move(ack)));
    }
    case MessageType::kUploadBatch: {
      if (!greeted_) return Fail(msg.session, "bad_request", "no handshake");
      const auto& up = std::get<UploadBatchPayload>(msg.payload);
      try {
        FeedbackMessage fb =
            sentinel_.Answer(protocol_, up.features, up.labels);
        return Reply(MakeFeedback(session_, msg.seq + 1, std::move(fb)));
      } catch (const BudgetExceeded& e) {
        return Fail(session_, "budget_exceeded", e.what());
      } catch (const Error& e) {
        return Fail(session_, "bad_request", e.what());
      }
    }
    default:
      return Fail(msg.session, "bad_request",
                  "unexpected " + MessageTypeName(msg.type) + " from provider");
  }
}

void SentinelEndpoint::Serve(Channel& channel) {
  while (!finished_) {
    std::optional<Frame> frame = channel.Receive();
    if (!frame) return;
    channel.Send(Handle(*frame));
  }
}

void InProcessChannel::Send(std::span<const std::uint8_t> frame) {
  if (pending_) throw ProtocolError("request sent before reading the reply");
  pending_ = endpoint_.Handle(frame);
}

std::optional<Frame> InProcessChannel::Receive() {
  std::optional<Frame> out = std::move(pending_);
  pending_.reset();
  return out;
}

RemoteSentinel::RemoteSentinel(Channel& channel, std::string session)
    : channel_(channel), session_(std::move(session)) {}

WireMessage RemoteSentinel::RoundTrip(const WireMessage& msg) {
  if (closed_) throw ProtocolError("session already closed by the sentinel");
  guard_.Check(msg);
  const Frame out = Encode(msg);
  log_.Record(msg, Direction::kToSentinel, out.size());
  channel_.Send(out);

  std::optional<Frame> in = channel_.Receive();
  if (!in) throw ConnectionError("sentinel closed the connection");
  WireMessage reply = Decode(*in);
  log_.Record(reply, Direction::kToProvider, in->size());
  if (reply.session != session_) {
    throw ProtocolError("reply for session " + reply.session);
  }
  guard_.Check(reply);
  next_seq_ = reply.seq + 1;

  if (reply.type == MessageType::kError) {
    closed_ = true;
    const auto& err = std::get<ErrorPayload>(reply.payload);
    if (err.code == "budget_exceeded") throw BudgetExceeded(err.message);
    throw ProtocolError(err.code + ": " + err.message);
  }
  return reply;
}

HelloPayload RemoteSentinel::Handshake(const HelloPayload& hello) {
  WireMessage reply = RoundTrip(MakeHello(session_, next_seq_, hello));
  if (reply.type != MessageType::kHelloAck) {
    throw ProtocolError("expected HelloAck, got " +
                        MessageTypeName(reply.type));
  }
  const auto& ack = std::get<HelloPayload>(reply.payload);
  if (ack.protocol != hello.protocol) {
    throw ProtocolError("sentinel acknowledged protocol " +
                        ProtocolName(ack.protocol));
  }
  ack_ = ack;
  return ack;
}

FeedbackMessage RemoteSentinel::Request(const Matrix& generated,
                                        std::span<const int> labels) {
  if (!ack_) throw ProtocolError("request before handshake");
  if (generated.origin() == Origin::kOwnerData) {
    throw ProtocolError("refusing to upload rows tagged as owner data");
  }
  WireMessage reply = RoundTrip(MakeUpload(
      session_, next_seq_, generated,
      std::vector<int>(labels.begin(), labels.end())));
  const MessageType expected = ack_->protocol == ProtocolKind::kWhitebox
                                   ? MessageType::kWhiteboxFeedback
                                   : MessageType::kBlackboxFeedback;
  if (reply.type != expected) {
    throw ProtocolError("expected " + MessageTypeName(expected) + ", got " +
                        MessageTypeName(reply.type));
  }
  if (ack_->protocol == ProtocolKind::kBlackbox && reply.HasMidRiskField()) {
    throw ProtocolError("black-box reply carries a mid-risk field");
  }
  FeedbackMessage fb = std::get<FeedbackMessage>(std::move(reply.payload));
  if (fb.softmax.rows() != generated.rows() ||
      fb.gradient.rows() != generated.rows() ||
      fb.gradient.cols() != generated.cols()) {
    throw ProtocolError("feedback shape does not match the uploaded batch");
  }
  return fb;
}

}  // namespace sgzsl
