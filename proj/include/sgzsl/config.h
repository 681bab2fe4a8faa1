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

#ifndef SGZSL_CONFIG_H_
#define SGZSL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgzsl/dataset.h"
#include "sgzsl/dp.h"
#include "sgzsl/feedback.h"
#include "sgzsl/provider.h"
#include "sgzsl/regularizers.h"
#include "sgzsl/sentinel.h"

namespace sgzsl {

enum class TransportKind { kInProcess, kTcp };

std::string TransportName(TransportKind kind);

// Everything a run needs, as one flat JSON document. Desk-scale defaults;
// `full_scale` swaps in the large network sizes and learning rate before
// the other keys are applied.
struct RunConfig {
  ProtocolKind protocol = ProtocolKind::kWhitebox;
  TeacherMode teacher_mode = TeacherMode::kOmniscient;
  RegularizerKind regularizer = RegularizerKind::KlMoments();
  double alpha = 0.5;

  TeacherTrainConfig teacher;
  TrainLoopConfig loop;
  SyntheticSpec synthetic;

  std::optional<std::uint64_t> budget;
  TransportKind transport = TransportKind::kInProcess;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string data_dir;  // Empty: generate the synthetic benchmark.
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool full_scale = false;

  // Throws ConfigError naming the offending key.
  static RunConfig FromJson(const std::string& json);
  static RunConfig Load(const std::filesystem::path& path);
  // Applies a single `key=value` override on top of this config.
  void Set(const std::string& key, const std::string& value);

  void Validate() const;
  // Effective configuration, in the same flat layout FromJson reads.
  std::string ToJson() const;

  // Pushes `seed` into every component that carries its own copy.
  void PropagateSeed();
};

SentinelConfig MakeSentinelConfig(const RunConfig& config);

}  // namespace sgzsl

#endif  // SGZSL_CONFIG_H_
