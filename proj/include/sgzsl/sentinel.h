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

#ifndef SGZSL_SENTINEL_H_
#define SGZSL_SENTINEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sgzsl/dataset.h"
#include "sgzsl/dp.h"
#include "sgzsl/feedback.h"
#include "sgzsl/mlp.h"
#include "sgzsl/regularizers.h"

namespace sgzsl {

struct TeacherTrainConfig {
  std::vector<std::size_t> hidden = {64, 32};
  double leaky_slope = 0.01;
  int epochs = 50;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  DpConfig dp;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct TeacherEpochLog {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // Percent, on the training view.
  std::optional<double> epsilon;
};

struct TrainedTeacher {
  MlpModel model;  // Outputs logits over every class id in the dataset.
  TeacherMode mode = TeacherMode::kOmniscient;
  std::vector<int> classes;  // Class ids the teacher was trained on.
  std::vector<TeacherEpochLog> log;
  std::optional<double> epsilon;
};

// Supervised cross-entropy training on TeacherView(dataset, mode). With
// config.dp.enabled every step clips per-sample gradients, adds Gaussian
// noise, applies Adam, then truncates weights to [-c, c].
TrainedTeacher PretrainTeacher(const ZslDataset& dataset, TeacherMode mode,
                               const TeacherTrainConfig& config);

struct SentinelConfig {
  RegularizerKind regularizer = RegularizerKind::KlMoments();
  double alpha = 0.5;
  std::optional<std::uint64_t> budget;  // nullopt: unlimited.
};

// The data owner's side of the protocol. Holds the teacher and the teacher's
// training rows grouped by class; answers feedback requests on uploaded
// generated batches, one request at a time, debiting the request budget.
class Sentinel {
 public:
  Sentinel(TrainedTeacher teacher, const ZslDataset& dataset,
           SentinelConfig config);

  // Teacher softmax plus d(CE(batch, labels) + alpha * R(batch))/d(batch).
  FeedbackMessage AnswerWhitebox(const Matrix& batch,
                                 std::span<const int> labels);
  // Teacher softmax plus d(alpha * R(batch))/d(batch); no classification
  // gradient is computed.
  FeedbackMessage AnswerBlackbox(const Matrix& batch,
                                 std::span<const int> labels);
  FeedbackMessage Answer(ProtocolKind kind, const Matrix& batch,
                         std::span<const int> labels);

  std::optional<std::uint64_t> initial_budget() const { return config_.budget; }
  std::optional<std::uint64_t> remaining_budget() const;
  std::uint64_t answered() const { return answered_; }

  std::size_t feature_dim() const { return teacher_.model.input_dim(); }
  std::size_t num_classes() const { return teacher_.model.output_dim(); }
  const std::vector<int>& classes() const { return teacher_.classes; }
  TeacherMode mode() const { return teacher_.mode; }
  double alpha() const { return config_.alpha; }
  const SentinelConfig& config() const { return config_; }

 private:
  void CheckRequest(const Matrix& batch, std::span<const int> labels) const;
  void ConsumeBudget();
  // R over the uploaded batch against the real rows of the classes it
  // claims. Classes the sentinel holds no rows for contribute nothing.
  RegValue Regularize(const Matrix& batch, std::span<const int> labels) const;

  TrainedTeacher teacher_;
  SentinelConfig config_;
  std::map<int, Matrix> real_by_class_;
  std::uint64_t answered_ = 0;
};

}  // namespace sgzsl

#endif  // SGZSL_SENTINEL_H_
