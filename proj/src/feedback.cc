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

#include "sgzsl/feedback.h"

#include "sgzsl/errors.h"

namespace sgzsl {

std::string RiskName(Risk risk) { return risk == Risk::kLow ? "low" : "mid"; }

Risk ParseRisk(const std::string& name) {
  if (name == "low") return Risk::kLow;
  if (name == "mid") return Risk::kMid;
  throw SchemaError("risk", "unknown risk level '" + name + "'");
}

std::string ProtocolName(ProtocolKind kind) {
  return kind == ProtocolKind::kWhitebox ? "whitebox" : "blackbox";
}

ProtocolKind ParseProtocol(const std::string& name) {
  if (name == "whitebox" || name == "white") return ProtocolKind::kWhitebox;
  if (name == "blackbox" || name == "black") return ProtocolKind::kBlackbox;
  throw ConfigError("protocol", "unknown protocol '" + name + "'");
}

std::vector<std::pair<std::string, Risk>> FeedbackMessage::FieldRisks() const {
  return {{"softmax", Risk::kLow},
          {"reg_value", Risk::kLow},
          {gradient_field(), gradient_risk()}};
}

}  // namespace sgzsl
