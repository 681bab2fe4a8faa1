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

#include "sgzsl/sentinel.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "sgzsl/errors.h"
#include "sgzsl/rng.h"

namespace sgzsl {
namespace {

double Accuracy(const MlpModel& model, const DataView& view) {
  if (view.size() == 0) return 0.0;
  const auto pred = RowArgmax(Predict(model, view.features));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (static_cast<int>(pred[i]) == view.labels[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

void RequireFeedbackIsUntagged(const FeedbackMessage& msg) {
  if (msg.softmax.origin() == Origin::kOwnerData ||
      msg.gradient.origin() == Origin::kOwnerData) {
    throw ProtocolError("sentinel: refusing to emit owner data in feedback");
  }
}

}  // namespace

void TeacherTrainConfig::Validate() const {
  if (epochs <= 0) throw ConfigError("teacher_epochs", "must be > 0");
  if (batch_size == 0) throw ConfigError("teacher_batch_size", "must be > 0");
  if (!(lr > 0.0)) throw ConfigError("teacher_lr", "must be > 0");
  if (!(leaky_slope > 0.0)) throw ConfigError("leaky_slope", "must be > 0");
  dp.Validate();
}

TrainedTeacher PretrainTeacher(const ZslDataset& dataset, TeacherMode mode,
                               const TeacherTrainConfig& config) {
  config.Validate();
  dataset.Validate();
  const DataView view = TeacherView(dataset, mode);
  if (view.size() == 0) throw DataError("teacher view is empty");
  // The quasi-omniscient teacher must never touch an unseen-class row.
  if (mode == TeacherMode::kQuasiOmniscient) {
    for (std::size_t i = 0; i < view.size(); ++i) {
      if (view.splits[i] != Split::kTeacherTrainSeen ||
          dataset.IsUnseen(view.labels[i])) {
        throw DataError("quasi-omniscient teacher view contains row " +
                        std::to_string(view.row_ids[i]) + " of class " +
                        std::to_string(view.labels[i]));
      }
    }
  }

  TrainedTeacher out;
  out.mode = mode;
  out.classes = dataset.seen_classes;
  if (mode == TeacherMode::kOmniscient) {
    out.classes.insert(out.classes.end(), dataset.unseen_classes.begin(),
                       dataset.unseen_classes.end());
  }
  std::sort(out.classes.begin(), out.classes.end());
  {
    std::set<int> present(view.labels.begin(), view.labels.end());
    for (int c : out.classes) {
      if (!present.count(c)) {
        throw DataError("class " + std::to_string(c) +
                        " has no teacher training rows");
      }
    }
  }

  std::vector<std::size_t> dims = {dataset.feature_dim()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(dataset.num_classes());
  std::vector<Activation> acts(config.hidden.size(),
                               Activation::LeakyRelu(config.leaky_slope));
  acts.push_back(Activation::Identity());
  Rng init_rng(config.seed, streams::kTeacherInit);
  out.model = MlpModel::Create(dims, acts, init_rng);
  SetModelOrigin(out.model, Origin::kOwnerData);

  Rng batch_rng(config.seed, streams::kTeacherBatches);
  Rng noise_rng(config.seed, streams::kDpNoise);
  AdamState adam(out.model, AdamConfig{.lr = config.lr});
  DpConfig dp = config.dp;
  if (dp.enabled) {
    dp.sample_rate = std::min(1.0, static_cast<double>(config.batch_size) /
                                       static_cast<double>(view.size()));
    dp.steps = 0;
  }

  std::vector<std::size_t> order(view.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    batch_rng.Shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
      const Matrix x = SelectRows(view.features, idx);
      std::vector<int> y;
      for (std::size_t i : idx) y.push_back(view.labels[i]);
      const auto n = static_cast<double>(idx.size());

      GradBundle grads;
      if (dp.enabled) {
        std::vector<GradBundle> per_sample;
        per_sample.reserve(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
          const std::size_t one[] = {r};
          const Matrix xr = SelectRows(x, one);
          const int yr[] = {y[r]};
          const auto acts_r = Forward(out.model, xr);
          const auto ce = SoftmaxCrossEntropy(acts_r.back(), yr, Reduction::kSum);
          loss_sum += ce.loss;
          per_sample.push_back(Backward(out.model, acts_r, ce.grad).grads);
        }
        grads = DpSgdStep(per_sample, dp, noise_rng);
        ++dp.steps;
      } else {
        const auto acts_b = Forward(out.model, x);
        const auto ce = SoftmaxCrossEntropy(acts_b.back(), y, Reduction::kSum);
        loss_sum += ce.loss;
        grads = Backward(out.model, acts_b, ce.grad).grads;
        grads.DivideInPlace(n);
      }
      AdamStep(out.model, grads, adam);
      if (dp.enabled) ClipWeights(out.model, dp.weight_clip);
    }
    TeacherEpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / static_cast<double>(view.size());
    entry.accuracy = Accuracy(out.model, view);
    if (dp.enabled) entry.epsilon = PrivacyReport(dp);
    out.log.push_back(entry);
  }
  if (dp.enabled) out.epsilon = PrivacyReport(dp);
  return out;
}

Sentinel::Sentinel(TrainedTeacher teacher, const ZslDataset& dataset,
                   SentinelConfig config)
    : teacher_(std::move(teacher)), config_(std::move(config)) {
  config_.regularizer.Validate();
  SetModelOrigin(teacher_.model, Origin::kOwnerData);
  if (!(config_.alpha >= 0.0)) throw ConfigError("alpha", "must be >= 0");
  if (teacher_.model.input_dim() != dataset.feature_dim()) {
    throw DimensionError("sentinel: teacher expects " +
                         std::to_string(teacher_.model.input_dim()) +
                         " features, dataset has " +
                         std::to_string(dataset.feature_dim()));
  }
  const DataView view = TeacherView(dataset, teacher_.mode);
  std::map<int, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < view.size(); ++i) {
    rows[view.labels[i]].push_back(i);
  }
  for (const auto& [label, idx] : rows) {
    real_by_class_[label] = SelectRows(view.features, idx);
  }
}

std::optional<std::uint64_t> Sentinel::remaining_budget() const {
  if (!config_.budget) return std::nullopt;
  return *config_.budget - answered_;
}

void Sentinel::CheckRequest(const Matrix& batch,
                            std::span<const int> labels) const {
  if (batch.cols() != feature_dim()) {
    throw DimensionError("sentinel: batch has " + std::to_string(batch.cols()) +
                         " features, teacher expects " +
                         std::to_string(feature_dim()));
  }
  if (labels.size() != batch.rows()) {
    throw DimensionError("sentinel: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(batch.rows()) +
                         " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes()) {
      throw DimensionError("sentinel: label " + std::to_string(y) +
                           " outside the teacher's output space");
    }
  }
  if (!AllFinite(batch)) throw DimensionError("sentinel: non-finite batch");
}

void Sentinel::ConsumeBudget() {
  if (config_.budget && answered_ >= *config_.budget) {
    throw BudgetExceeded("sentinel: request budget of " +
                         std::to_string(*config_.budget) + " exhausted");
  }
  ++answered_;
}

RegValue Sentinel::Regularize(const Matrix& batch,
                              std::span<const int> labels) const {
  RegValue none{0.0, Matrix(batch.rows(), batch.cols())};
  if (config_.regularizer.tag == RegularizerKind::Tag::kNone) return none;
  const std::set<int> claimed(labels.begin(), labels.end());
  Matrix real;
  for (int c : claimed) {
    auto it = real_by_class_.find(c);
    if (it != real_by_class_.end()) real = VStack(real, it->second);
  }
  if (real.rows() < 2 || batch.rows() < 2) return none;
  return EvaluateRegularizer(config_.regularizer, real, batch);
}

FeedbackMessage Sentinel::AnswerWhitebox(const Matrix& batch,
                                         std::span<const int> labels) {
  CheckRequest(batch, labels);
  ConsumeBudget();
  const auto acts = Forward(teacher_.model, batch);
  const auto ce = SoftmaxCrossEntropy(acts.back(), labels);
  auto back = Backward(teacher_.model, acts, ce.grad);
  const RegValue reg = Regularize(batch, labels);

  FeedbackMessage msg;
  msg.kind = ProtocolKind::kWhitebox;
  msg.softmax = Softmax(acts.back());
  msg.reg_value = reg.value;
  msg.gradient = std::move(back.input_grad);
  for (std::size_t i = 0; i < msg.gradient.size(); ++i) {
    msg.gradient.data()[i] += config_.alpha * reg.grad.data()[i];
  }
  RequireFeedbackIsUntagged(msg);
  return msg;
}

FeedbackMessage Sentinel::AnswerBlackbox(const Matrix& batch,
                                         std::span<const int> labels) {
  CheckRequest(batch, labels);
  ConsumeBudget();
  const RegValue reg = Regularize(batch, labels);

  FeedbackMessage msg;
  msg.kind = ProtocolKind::kBlackbox;
  msg.softmax = Softmax(Predict(teacher_.model, batch));
  msg.reg_value = reg.value;
  msg.gradient = reg.grad;
  ScaleInPlace(msg.gradient, config_.alpha);
  RequireFeedbackIsUntagged(msg);
  return msg;
}

FeedbackMessage Sentinel::Answer(ProtocolKind kind, const Matrix& batch,
                                 std::span<const int> labels) {
  return kind == ProtocolKind::kWhitebox ? AnswerWhitebox(batch, labels)
                                         : AnswerBlackbox(batch, labels);
}

}  // namespace sgzsl
