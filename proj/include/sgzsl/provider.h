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

#ifndef SGZSL_PROVIDER_H_
#define SGZSL_PROVIDER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sgzsl/feedback.h"
#include "sgzsl/matrix.h"
#include "sgzsl/mlp.h"
#include "sgzsl/protocol.h"
#include "sgzsl/rng.h"
#include "sgzsl/session.h"
#include "sgzsl/task.h"

namespace sgzsl {

struct GeneratorConfig {
  std::size_t noise_dim = 20;
  std::size_t hidden = 256;
  double leaky_slope = 0.01;
};

// G(z|a): concat(z, a) -> hidden LeakyReLU -> ReLU features.
struct GeneratorNet {
  MlpModel net;
  std::size_t noise_dim = 0;
  std::size_t semantic_dim = 0;
  std::size_t feature_dim = 0;

  static GeneratorNet Create(const GeneratorConfig& config,
                             std::size_t semantic_dim, std::size_t feature_dim,
                             Rng& rng);
};

struct GeneratedBatch {
  Matrix features;
  std::vector<int> labels;
};

// n_per_class rows for each class in `classes`, class-major.
GeneratedBatch Synthesize(const GeneratorNet& gen, const Matrix& semantics,
                          std::span<const int> classes, std::size_t n_per_class,
                          Rng& rng);

struct TrainLoopConfig {
  int generator_epochs = 50;  // T_g
  int student_epochs = 80;    // T_s
  std::size_t batch_size = 64;
  std::size_t features_per_class = 400;
  ProtocolKind protocol = ProtocolKind::kWhitebox;
  double lr = 1e-3;
  bool verify = true;
  GeneratorConfig generator;
  std::vector<std::size_t> student_hidden = {64, 32};
  int classifier_epochs = 40;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct VerifiedBatch {
  Matrix features;
  std::vector<int> labels;
  Matrix teacher_softmax;

  std::size_t size() const { return labels.size(); }
};

// Keeps rows whose teacher argmax equals the conditioned label, in order.
VerifiedBatch VerifyLabels(const Matrix& features, std::span<const int> labels,
                           const Matrix& teacher_softmax);

struct GeneratorEpochLog {
  int epoch = 0;
  double teacher_loss = 0.0;  // Mean -log p_T(label) on the uploaded rows.
  double reg_value = 0.0;     // Mean regularizer value reported back.
  double student_loss = 0.0;  // Black-box only.
  double verified_fraction = 0.0;
};

struct StudentEpochLog {
  int epoch = 0;
  double loss = 0.0;
};

// Student distillation on a fixed verified set: squared error between
// student and teacher softmax rows.
std::vector<StudentEpochLog> TrainStudent(MlpModel& student,
                                          const VerifiedBatch& verified,
                                          const TrainLoopConfig& config,
                                          Rng& rng);

// Linear softmax classifier over a fixed set of class ids.
struct Classifier {
  MlpModel net;
  std::vector<int> output_classes;  // Column j of the logits is this id.
};

// Trains C on features_per_class synthetic rows per target class.
Classifier TrainUnseenClassifier(const GeneratorNet& gen,
                                 const Matrix& semantics,
                                 std::span<const int> target_classes,
                                 const TrainLoopConfig& config,
                                 double* train_accuracy = nullptr);

// Argmax of softmax restricted to `label_space`, ties to the smallest id.
// Column j of `probs` is class `column_classes[j]`.
std::vector<int> PredictRestricted(const Matrix& probs,
                                   std::span<const int> column_classes,
                                   std::span<const int> label_space);
std::vector<int> Predict(const MlpModel& model, const Matrix& x,
                         std::span<const int> label_space);
std::vector<int> Predict(const Classifier& classifier, const Matrix& x,
                         std::span<const int> label_space);

struct ProviderResult {
  GeneratorNet generator;
  MlpModel student;  // Softmax head over every class id.
  std::vector<GeneratorEpochLog> generator_log;
  std::vector<StudentEpochLog> student_log;
  std::size_t generated_rows = 0;  // Rows uploaded for distillation.
  std::size_t verified_rows = 0;
  bool budget_exhausted = false;
};

// Runs both training stages against the sentinel: generator training for
// T_g epochs (white-box gradient guidance or black-box end-to-end), then
// collection of verified features and student distillation for T_s epochs.
// Only `task` and the sentinel's replies are read. BudgetExceeded propagates
// out; `partial` (if given) then holds everything trained so far.
ProviderResult TrainProvider(FeedbackSource& sentinel,
                             const HelloPayload& ack, const TaskInfo& task,
                             const TrainLoopConfig& config,
                             ProviderResult* partial = nullptr);

// Number of provider-side provenance checks performed so far in this process.
std::uint64_t ProvenanceChecks();

}  // namespace sgzsl

#endif  // SGZSL_PROVIDER_H_
