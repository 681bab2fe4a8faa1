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

#include "sgzsl/protocol.h"

#include <utility>

#include "json.hpp"
#include "sgzsl/errors.h"

namespace sgzsl {
namespace {

using Json = nlohmann::ordered_json;

Json MatrixToJson(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = m.values();
  return j;
}

const Json& Field(const Json& obj, const std::string& key,
                  const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(path.empty() ? key : path + "." + key,
                      "missing required field");
  }
  return *it;
}

std::string Join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::uint64_t GetUnsigned(const Json& obj, const std::string& key,
                          const std::string& path) {
  const Json& v = Field(obj, key, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw SchemaError(Join(path, key), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double GetDouble(const Json& obj, const std::string& key,
                 const std::string& path) {
  const Json& v = Field(obj, key, path);
  if (!v.is_number()) throw SchemaError(Join(path, key), "expected a number");
  return v.get<double>();
}

std::string GetString(const Json& obj, const std::string& key,
                      const std::string& path) {
  const Json& v = Field(obj, key, path);
  if (!v.is_string()) throw SchemaError(Join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<int> GetIntArray(const Json& obj, const std::string& key,
                             const std::string& path) {
  const Json& v = Field(obj, key, path);
  if (!v.is_array()) throw SchemaError(Join(path, key), "expected an array");
  std::vector<int> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number_integer()) {
      throw SchemaError(Join(path, key), "expected integers");
    }
    out.push_back(e.get<int>());
  }
  return out;
}

Matrix GetMatrix(const Json& obj, const std::string& key,
                 const std::string& path) {
  const std::string here = Join(path, key);
  const Json& v = Field(obj, key, path);
  const auto rows = GetUnsigned(v, "rows", here);
  const auto cols = GetUnsigned(v, "cols", here);
  const Json& data = Field(v, "data", here);
  if (!data.is_array()) throw SchemaError(here + ".data", "expected an array");
  if (data.size() != rows * cols) {
    throw SchemaError(here + ".data", std::to_string(data.size()) +
                                          " values for shape " +
                                          std::to_string(rows) + "x" +
                                          std::to_string(cols));
  }
  std::vector<double> values;
  values.reserve(data.size());
  for (const auto& e : data) {
    if (!e.is_number()) throw SchemaError(here + ".data", "expected numbers");
    values.push_back(e.get<double>());
  }
  return Matrix(rows, cols, std::move(values));
}

Json RiskJson(const std::vector<std::pair<std::string, Risk>>& risks) {
  Json j = Json::object();
  for (const auto& [name, risk] : risks) j[name] = RiskName(risk);
  return j;
}

void CheckRiskTags(const Json& payload,
                   const std::vector<std::pair<std::string, Risk>>& expected,
                   const std::string& path) {
  const Json& tags = Field(payload, "risk", path);
  if (!tags.is_object() || tags.size() != expected.size()) {
    throw SchemaError(path + ".risk", "unexpected risk tag set");
  }
  for (const auto& [name, risk] : expected) {
    const std::string tag = GetString(tags, name, path + ".risk");
    if (ParseRisk(tag) != risk) {
      throw ProtocolError(path + ".risk." + name + ": tagged " + tag +
                          ", expected " + RiskName(risk));
    }
  }
}

Json HelloToJson(const HelloPayload& h) {
  Json j;
  j["protocol"] = ProtocolName(h.protocol);
  j["feature_dim"] = h.feature_dim;
  j["num_classes"] = h.num_classes;
  j["alpha"] = h.alpha;
  if (h.budget) {
    j["budget"] = *h.budget;
  } else {
    j["budget"] = nullptr;
  }
  j["classes"] = h.classes;
  return j;
}

HelloPayload HelloFromJson(const Json& j) {
  const std::string p = "payload";
  HelloPayload h;
  const std::string proto = GetString(j, "protocol", p);
  if (proto != "whitebox" && proto != "blackbox") {
    throw SchemaError("payload.protocol", "unknown protocol '" + proto + "'");
  }
  h.protocol = ParseProtocol(proto);
  h.feature_dim = GetUnsigned(j, "feature_dim", p);
  h.num_classes = GetUnsigned(j, "num_classes", p);
  h.alpha = GetDouble(j, "alpha", p);
  const Json& budget = Field(j, "budget", p);
  if (!budget.is_null()) h.budget = GetUnsigned(j, "budget", p);
  h.classes = GetIntArray(j, "classes", p);
  return h;
}

const std::vector<std::pair<std::string, Risk>>& UploadRisks() {
  static const std::vector<std::pair<std::string, Risk>> risks = {
      {"features", Risk::kLow}, {"labels", Risk::kLow}};
  return risks;
}

MessageType ParseType(const std::string& name) {
  static const std::pair<const char*, MessageType> kTypes[] = {
      {"Hello", MessageType::kHello},
      {"HelloAck", MessageType::kHelloAck},
      {"UploadBatch", MessageType::kUploadBatch},
      {"WhiteboxFeedback", MessageType::kWhiteboxFeedback},
      {"BlackboxFeedback", MessageType::kBlackboxFeedback},
      {"Error", MessageType::kError},
  };
  for (const auto& [n, t] : kTypes) {
    if (name == n) return t;
  }
  throw ProtocolVersionError("unknown message type '" + name + "'");
}

Json PayloadToJson(const WireMessage& msg) {
  switch (msg.type) {
    case MessageType::kHello:
    case MessageType::kHelloAck:
      return HelloToJson(std::get<HelloPayload>(msg.payload));
    case MessageType::kUploadBatch: {
      const auto& up = std::get<UploadBatchPayload>(msg.payload);
      Json j;
      j["source"] = "generated";
      j["features"] = MatrixToJson(up.features);
      j["labels"] = up.labels;
      j["risk"] = RiskJson(UploadRisks());
      return j;
    }
    case MessageType::kWhiteboxFeedback:
    case MessageType::kBlackboxFeedback: {
      const auto& fb = std::get<FeedbackMessage>(msg.payload);
      Json j;
      j["softmax"] = MatrixToJson(fb.softmax);
      j["reg_value"] = fb.reg_value;
      j[fb.gradient_field()] = MatrixToJson(fb.gradient);
      j["risk"] = RiskJson(fb.FieldRisks());
      return j;
    }
    case MessageType::kError: {
      const auto& err = std::get<ErrorPayload>(msg.payload);
      Json j;
      j["code"] = err.code;
      j["message"] = err.message;
      return j;
    }
  }
  return Json::object();
}

void CheckPayloadMatchesType(const WireMessage& msg) {
  bool ok = false;
  switch (msg.type) {
    case MessageType::kHello:
    case MessageType::kHelloAck:
      ok = std::holds_alternative<HelloPayload>(msg.payload);
      break;
    case MessageType::kUploadBatch:
      ok = std::holds_alternative<UploadBatchPayload>(msg.payload);
      break;
    case MessageType::kWhiteboxFeedback:
      ok = std::holds_alternative<FeedbackMessage>(msg.payload) &&
           std::get<FeedbackMessage>(msg.payload).kind ==
               ProtocolKind::kWhitebox;
      break;
    case MessageType::kBlackboxFeedback:
      ok = std::holds_alternative<FeedbackMessage>(msg.payload) &&
           std::get<FeedbackMessage>(msg.payload).kind ==
               ProtocolKind::kBlackbox;
      break;
    case MessageType::kError:
      ok = std::holds_alternative<ErrorPayload>(msg.payload);
      break;
  }
  if (!ok) {
    throw ProtocolError("payload does not match message type " +
                        MessageTypeName(msg.type));
  }
}

}  // namespace

std::string MessageTypeName(MessageType type) {
  switch (type) {
    case MessageType::kHello:
      return "Hello";
    case MessageType::kHelloAck:
      return "HelloAck";
    case MessageType::kUploadBatch:
      return "UploadBatch";
    case MessageType::kWhiteboxFeedback:
      return "WhiteboxFeedback";
    case MessageType::kBlackboxFeedback:
      return "BlackboxFeedback";
    case MessageType::kError:
      return "Error";
  }
  return "Error";
}

std::vector<std::pair<std::string, Risk>> WireMessage::FieldRisks() const {
  switch (type) {
    case MessageType::kHello:
    case MessageType::kHelloAck:
      return {{"protocol", Risk::kLow},   {"feature_dim", Risk::kLow},
              {"num_classes", Risk::kLow}, {"alpha", Risk::kLow},
              {"budget", Risk::kLow},     {"classes", Risk::kLow}};
    case MessageType::kUploadBatch:
      return UploadRisks();
    case MessageType::kWhiteboxFeedback:
    case MessageType::kBlackboxFeedback:
      return std::get<FeedbackMessage>(payload).FieldRisks();
    case MessageType::kError:
      return {{"code", Risk::kLow}, {"message", Risk::kLow}};
  }
  return {};
}

bool WireMessage::HasMidRiskField() const {
  for (const auto& [name, risk] : FieldRisks()) {
    if (risk == Risk::kMid) return true;
  }
  return false;
}

WireMessage MakeHello(std::string session, std::uint64_t seq,
                      HelloPayload hello) {
  return {MessageType::kHello, std::move(session), seq, std::move(hello)};
}

WireMessage MakeHelloAck(std::string session, std::uint64_t seq,
                         HelloPayload hello) {
  return {MessageType::kHelloAck, std::move(session), seq, std::move(hello)};
}

WireMessage MakeUpload(std::string session, std::uint64_t seq, Matrix features,
                       std::vector<int> labels) {
  if (features.origin() == Origin::kOwnerData) {
    throw ProtocolError("UploadBatch may only carry generated features");
  }
  return {MessageType::kUploadBatch, std::move(session), seq,
          UploadBatchPayload{std::move(features), std::move(labels)}};
}

WireMessage MakeFeedback(std::string session, std::uint64_t seq,
                         FeedbackMessage feedback) {
  const MessageType type = feedback.kind == ProtocolKind::kWhitebox
                               ? MessageType::kWhiteboxFeedback
                               : MessageType::kBlackboxFeedback;
  return {type, std::move(session), seq, std::move(feedback)};
}

WireMessage MakeError(std::string session, std::uint64_t seq, std::string code,
                      std::string message) {
  return {MessageType::kError, std::move(session), seq,
          ErrorPayload{std::move(code), std::move(message)}};
}

std::string EncodeJson(const WireMessage& msg) {
  CheckPayloadMatchesType(msg);
  Json j;
  j["v"] = kProtocolVersion;
  j["type"] = MessageTypeName(msg.type);
  j["session"] = msg.session;
  j["seq"] = msg.seq;
  j["payload"] = PayloadToJson(msg);
  return j.dump();
}

std::vector<std::uint8_t> Encode(const WireMessage& msg) {
  const std::string body = EncodeJson(msg);
  if (body.size() > kMaxPayloadBytes) {
    throw ProtocolError("message of " + std::to_string(body.size()) +
                        " bytes exceeds the 64 MiB limit");
  }
  const auto n = static_cast<std::uint32_t>(body.size());
  std::vector<std::uint8_t> frame;
  frame.reserve(4 + body.size());
  frame.push_back(static_cast<std::uint8_t>(n >> 24));
  frame.push_back(static_cast<std::uint8_t>(n >> 16));
  frame.push_back(static_cast<std::uint8_t>(n >> 8));
  frame.push_back(static_cast<std::uint8_t>(n));
  frame.insert(frame.end(), body.begin(), body.end());
  return frame;
}

WireMessage DecodeJson(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message is not a JSON object");
  const Json& v = Field(j, "v", "");
  if (!v.is_number_integer() || v.get<long long>() != kProtocolVersion) {
    throw ProtocolVersionError("unsupported protocol version " + v.dump());
  }
  WireMessage msg;
  msg.type = ParseType(GetString(j, "type", ""));
  msg.session = GetString(j, "session", "");
  msg.seq = GetUnsigned(j, "seq", "");
  const Json& p = Field(j, "payload", "");
  if (!p.is_object()) throw SchemaError("payload", "expected an object");

  switch (msg.type) {
    case MessageType::kHello:
    case MessageType::kHelloAck:
      msg.payload = HelloFromJson(p);
      break;
    case MessageType::kUploadBatch: {
      if (GetString(p, "source", "payload") != "generated") {
        throw ProtocolError("payload.source: uploads must be generated data");
      }
      CheckRiskTags(p, UploadRisks(), "payload");
      UploadBatchPayload up{GetMatrix(p, "features", "payload"),
                            GetIntArray(p, "labels", "payload")};
      if (up.labels.size() != up.features.rows()) {
        throw SchemaError("payload.labels", "one label per feature row");
      }
      msg.payload = std::move(up);
      break;
    }
    case MessageType::kWhiteboxFeedback:
    case MessageType::kBlackboxFeedback: {
      FeedbackMessage fb;
      fb.kind = msg.type == MessageType::kWhiteboxFeedback
                    ? ProtocolKind::kWhitebox
                    : ProtocolKind::kBlackbox;
      if (fb.kind == ProtocolKind::kBlackbox && p.contains("grad")) {
        throw ProtocolError(
            "BlackboxFeedback carries a classification gradient");
      }
      fb.softmax = GetMatrix(p, "softmax", "payload");
      fb.reg_value = GetDouble(p, "reg_value", "payload");
      fb.gradient = GetMatrix(p, fb.gradient_field(), "payload");
      CheckRiskTags(p, fb.FieldRisks(), "payload");
      msg.payload = std::move(fb);
      break;
    }
    case MessageType::kError:
      msg.payload = ErrorPayload{GetString(p, "code", "payload"),
                                 GetString(p, "message", "payload")};
      break;
  }
  return msg;
}

WireMessage Decode(std::span<const std::uint8_t> frame) {
  if (frame.size() < 4) {
    throw ProtocolError("truncated frame: " + std::to_string(frame.size()) +
                        " bytes, no complete length prefix");
  }
  const std::uint32_t n = (std::uint32_t{frame[0]} << 24) |
                          (std::uint32_t{frame[1]} << 16) |
                          (std::uint32_t{frame[2]} << 8) |
                          std::uint32_t{frame[3]};
  if (n > kMaxPayloadBytes) {
    throw ProtocolError("declared length " + std::to_string(n) +
                        " exceeds the 64 MiB limit");
  }
  if (frame.size() - 4 < n) {
    throw ProtocolError("truncated frame: declared " + std::to_string(n) +
                        " bytes, got " + std::to_string(frame.size() - 4));
  }
  if (frame.size() - 4 > n) {
    throw ProtocolError("trailing bytes after frame");
  }
  return DecodeJson(std::string(frame.begin() + 4, frame.end()));
}

void SequenceGuard::Check(const WireMessage& msg) {
  auto it = last_.find(msg.session);
  if (it != last_.end() && msg.seq <= it->second) {
    throw OrderingError("session " + msg.session + ": seq " +
                        std::to_string(msg.seq) + " after " +
                        std::to_string(it->second));
  }
  last_[msg.session] = msg.seq;
}

std::optional<std::uint64_t> SequenceGuard::last(
    const std::string& session) const {
  auto it = last_.find(session);
  if (it == last_.end()) return std::nullopt;
  return it->second;
}

}  // namespace sgzsl
