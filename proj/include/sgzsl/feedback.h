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

#ifndef SGZSL_FEEDBACK_H_
#define SGZSL_FEEDBACK_H_

#include <string>
#include <utility>
#include <vector>

#include "sgzsl/matrix.h"

namespace sgzsl {

// Disclosure level of a field leaving the data owner. Softmax scores and
// regularizer feedback are low risk; classification-loss gradients reveal
// teacher internals and are mid risk.
enum class Risk { kLow, kMid };

std::string RiskName(Risk risk);
Risk ParseRisk(const std::string& name);

enum class ProtocolKind { kWhitebox, kBlackbox };

std::string ProtocolName(ProtocolKind kind);
ProtocolKind ParseProtocol(const std::string& name);

// The sentinel's answer to one uploaded batch.
//
// Whitebox: `gradient` is d(CE + alpha * R)/d(batch), wire field "grad", mid.
// Blackbox: `gradient` is d(alpha * R)/d(batch), wire field "reg_grad", low.
// `reg_value` is the unweighted R(batch).
struct FeedbackMessage {
  ProtocolKind kind = ProtocolKind::kWhitebox;
  Matrix softmax;
  double reg_value = 0.0;
  Matrix gradient;

  const char* gradient_field() const {
    return kind == ProtocolKind::kWhitebox ? "grad" : "reg_grad";
  }
  Risk gradient_risk() const {
    return kind == ProtocolKind::kWhitebox ? Risk::kMid : Risk::kLow;
  }
  // Wire field names with their risk tags, in wire order.
  std::vector<std::pair<std::string, Risk>> FieldRisks() const;

  bool operator==(const FeedbackMessage&) const = default;
};

}  // namespace sgzsl

#endif  // SGZSL_FEEDBACK_H_
