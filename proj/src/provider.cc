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

#include "sgzsl/provider.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "sgzsl/errors.h"
#include "spdlog/spdlog.h"

namespace sgzsl {
namespace {

std::atomic<std::uint64_t> g_provenance_checks{0};

// Everything the provider reads passes through here. Owner rows or teacher
// weights would carry Origin::kOwnerData.
const Matrix& Inbound(const Matrix& m, const char* what) {
  g_provenance_checks.fetch_add(1, std::memory_order_relaxed);
  if (m.origin() == Origin::kOwnerData) {
    throw ProtocolError(std::string("provider received owner data in ") +
                        what);
  }
  return m;
}

void CheckClass(const Matrix& semantics, int c) {
  if (c < 0 || static_cast<std::size_t>(c) >= semantics.rows()) {
    throw DataError("unknown class id " + std::to_string(c));
  }
}

// Generator forward pass that keeps the activations for backprop.
std::vector<Matrix> GenerateWithActs(const GeneratorNet& gen,
                                     const Matrix& semantics,
                                     std::span<const int> classes,
                                     std::size_t n_per_class, Rng& rng,
                                     std::vector<int>* labels) {
  if (semantics.cols() != gen.semantic_dim) {
    throw DimensionError("generator expects " +
                         std::to_string(gen.semantic_dim) +
                         "-dim semantics, got " +
                         std::to_string(semantics.cols()));
  }
  for (int c : classes) CheckClass(semantics, c);
  const std::size_t n = classes.size() * n_per_class;
  Matrix input(n, gen.noise_dim + gen.semantic_dim);
  labels->clear();
  labels->reserve(n);
  std::size_t r = 0;
  for (int c : classes) {
    const auto a = semantics.row(static_cast<std::size_t>(c));
    for (std::size_t k = 0; k < n_per_class; ++k, ++r) {
      auto row = input.row(r);
      for (std::size_t j = 0; j < gen.noise_dim; ++j) row[j] = rng.Normal();
      std::copy(a.begin(), a.end(), row.begin() + gen.noise_dim);
      labels->push_back(c);
    }
  }
  if (n == 0) {
    return {input, Matrix(0, gen.feature_dim)};
  }
  return Forward(gen.net, input);
}

double MeanTeacherNll(const Matrix& softmax, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double p = softmax(r, static_cast<std::size_t>(labels[r]));
    total -= std::log(std::max(p, 1e-12));
  }
  return total / static_cast<double>(labels.size());
}

MlpModel CreateStudent(std::size_t feature_dim, std::size_t num_classes,
                       const TrainLoopConfig& config) {
  std::vector<std::size_t> dims = {feature_dim};
  dims.insert(dims.end(), config.student_hidden.begin(),
              config.student_hidden.end());
  dims.push_back(num_classes);
  std::vector<Activation> acts(config.student_hidden.size(),
                               Activation::LeakyRelu(0.01));
  acts.push_back(Activation::Identity());
  Rng rng(config.seed, streams::kStudentInit);
  return MlpModel::Create(dims, acts, rng);
}

void Append(VerifiedBatch& into, const VerifiedBatch& from, std::size_t take) {
  std::vector<std::size_t> idx(take);
  std::iota(idx.begin(), idx.end(), 0);
  into.features = VStack(into.features, SelectRows(from.features, idx));
  into.teacher_softmax =
      VStack(into.teacher_softmax, SelectRows(from.teacher_softmax, idx));
  into.labels.insert(into.labels.end(), from.labels.begin(),
                     from.labels.begin() + static_cast<std::ptrdiff_t>(take));
}

VerifiedBatch KeepAll(const Matrix& features, std::span<const int> labels,
                      const Matrix& softmax) {
  return {features, std::vector<int>(labels.begin(), labels.end()), softmax};
}

}  // namespace

std::uint64_t ProvenanceChecks() {
  return g_provenance_checks.load(std::memory_order_relaxed);
}

GeneratorNet GeneratorNet::Create(const GeneratorConfig& config,
                                  std::size_t semantic_dim,
                                  std::size_t feature_dim, Rng& rng) {
  if (config.noise_dim == 0) throw ConfigError("noise_dim", "must be > 0");
  if (config.hidden == 0) throw ConfigError("generator_hidden", "must be > 0");
  GeneratorNet gen;
  gen.noise_dim = config.noise_dim;
  gen.semantic_dim = semantic_dim;
  gen.feature_dim = feature_dim;
  const std::size_t dims[] = {config.noise_dim + semantic_dim, config.hidden,
                              feature_dim};
  const Activation acts[] = {Activation::LeakyRelu(config.leaky_slope),
                             Activation::Relu()};
  gen.net = MlpModel::Create(dims, acts, rng);
  return gen;
}

GeneratedBatch Synthesize(const GeneratorNet& gen, const Matrix& semantics,
                          std::span<const int> classes, std::size_t n_per_class,
                          Rng& rng) {
  GeneratedBatch out;
  auto acts =
      GenerateWithActs(gen, semantics, classes, n_per_class, rng, &out.labels);
  out.features = std::move(acts.back());
  return out;
}

void TrainLoopConfig::Validate() const {
  if (generator_epochs <= 0) throw ConfigError("generator_epochs", "must be > 0");
  if (student_epochs <= 0) throw ConfigError("student_epochs", "must be > 0");
  if (batch_size < 2) throw ConfigError("batch_size", "must be >= 2");
  if (features_per_class == 0) {
    throw ConfigError("features_per_class", "must be > 0");
  }
  if (!(lr > 0.0)) throw ConfigError("lr", "must be > 0");
  if (classifier_epochs <= 0) {
    throw ConfigError("classifier_epochs", "must be > 0");
  }
  if (generator.noise_dim == 0) throw ConfigError("noise_dim", "must be > 0");
  if (generator.hidden == 0) throw ConfigError("generator_hidden", "must be > 0");
}

VerifiedBatch VerifyLabels(const Matrix& features, std::span<const int> labels,
                           const Matrix& teacher_softmax) {
  if (features.rows() != labels.size() ||
      teacher_softmax.rows() != labels.size()) {
    throw DimensionError("VerifyLabels: " + std::to_string(features.rows()) +
                         " rows, " + std::to_string(labels.size()) +
                         " labels, " + std::to_string(teacher_softmax.rows()) +
                         " softmax rows");
  }
  const auto argmax = RowArgmax(teacher_softmax);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (static_cast<int>(argmax[r]) == labels[r]) keep.push_back(r);
  }
  VerifiedBatch out;
  out.features = SelectRows(features, keep);
  out.teacher_softmax = SelectRows(teacher_softmax, keep);
  out.labels.reserve(keep.size());
  for (std::size_t r : keep) out.labels.push_back(labels[r]);
  return out;
}

std::vector<StudentEpochLog> TrainStudent(MlpModel& student,
                                          const VerifiedBatch& verified,
                                          const TrainLoopConfig& config,
                                          Rng& rng) {
  if (verified.size() == 0) {
    throw DataError(
        "no verified features to distill from; disable label verification "
        "or train the generator longer");
  }
  AdamState adam(student, AdamConfig{.lr = config.lr});
  std::vector<std::size_t> order(verified.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<StudentEpochLog> log;
  for (int epoch = 1; epoch <= config.student_epochs; ++epoch) {
    rng.Shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix x = SelectRows(verified.features, idx);
      const Matrix t = SelectRows(verified.teacher_softmax, idx);
      const auto acts = Forward(student, x);
      const auto l = SoftmaxSquaredError(acts.back(), t);
      total += l.loss * static_cast<double>(idx.size());
      AdamStep(student, Backward(student, acts, l.grad).grads, adam);
    }
    log.push_back({epoch, total / static_cast<double>(order.size())});
  }
  return log;
}

Classifier TrainUnseenClassifier(const GeneratorNet& gen,
                                 const Matrix& semantics,
                                 std::span<const int> target_classes,
                                 const TrainLoopConfig& config,
                                 double* train_accuracy) {
  if (target_classes.empty()) {
    throw DataError("classifier needs at least one target class");
  }
  Inbound(semantics, "semantics");
  Rng rng(config.seed, streams::kClassifier);
  Classifier clf;
  clf.output_classes.assign(target_classes.begin(), target_classes.end());
  std::sort(clf.output_classes.begin(), clf.output_classes.end());
  const GeneratedBatch data = Synthesize(gen, semantics, clf.output_classes,
                                         config.features_per_class, rng);
  std::vector<int> columns(data.labels.size());
  for (std::size_t r = 0; r < data.labels.size(); ++r) {
    columns[r] = static_cast<int>(
        std::lower_bound(clf.output_classes.begin(), clf.output_classes.end(),
                         data.labels[r]) -
        clf.output_classes.begin());
  }
  const std::size_t dims[] = {gen.feature_dim, clf.output_classes.size()};
  const Activation acts[] = {Activation::Identity()};
  clf.net = MlpModel::Create(dims, acts, rng);

  AdamState adam(clf.net, AdamConfig{.lr = config.lr});
  std::vector<std::size_t> order(columns.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.classifier_epochs; ++epoch) {
    rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix x = SelectRows(data.features, idx);
      std::vector<int> y;
      y.reserve(idx.size());
      for (std::size_t i : idx) y.push_back(columns[i]);
      const auto fwd = Forward(clf.net, x);
      const auto ce = SoftmaxCrossEntropy(fwd.back(), y);
      AdamStep(clf.net, Backward(clf.net, fwd, ce.grad).grads, adam);
    }
  }
  if (train_accuracy != nullptr) {
    const auto pred = Predict(clf, data.features, clf.output_classes);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < pred.size(); ++r) {
      correct += pred[r] == data.labels[r];
    }
    *train_accuracy = pred.empty() ? 0.0
                                   : 100.0 * static_cast<double>(correct) /
                                         static_cast<double>(pred.size());
  }
  return clf;
}

std::vector<int> PredictRestricted(const Matrix& probs,
                                   std::span<const int> column_classes,
                                   std::span<const int> label_space) {
  if (label_space.empty()) throw DataError("empty label space");
  if (column_classes.size() != probs.cols()) {
    throw DimensionError("PredictRestricted: " +
                         std::to_string(column_classes.size()) +
                         " column ids for " + std::to_string(probs.cols()) +
                         " columns");
  }
  std::vector<int> space(label_space.begin(), label_space.end());
  std::sort(space.begin(), space.end());
  space.erase(std::unique(space.begin(), space.end()), space.end());
  std::vector<std::size_t> cols;
  for (int id : space) {
    auto it = std::find(column_classes.begin(), column_classes.end(), id);
    if (it == column_classes.end()) {
      throw DimensionError("label " + std::to_string(id) +
                           " is not an output of the model");
    }
    cols.push_back(static_cast<std::size_t>(it - column_classes.begin()));
  }
  std::vector<int> out(probs.rows());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    double best = -std::numeric_limits<double>::infinity();
    int best_id = space.front();
    for (std::size_t k = 0; k < space.size(); ++k) {
      const double p = probs(r, cols[k]);
      if (p > best) {
        best = p;
        best_id = space[k];
      }
    }
    out[r] = best_id;
  }
  return out;
}

std::vector<int> Predict(const MlpModel& model, const Matrix& x,
                         std::span<const int> label_space) {
  std::vector<int> columns(model.output_dim());
  std::iota(columns.begin(), columns.end(), 0);
  return PredictRestricted(Softmax(Predict(model, x)), columns, label_space);
}

std::vector<int> Predict(const Classifier& classifier, const Matrix& x,
                         std::span<const int> label_space) {
  return PredictRestricted(Softmax(Predict(classifier.net, x)),
                           classifier.output_classes, label_space);
}

ProviderResult TrainProvider(FeedbackSource& sentinel,
                             const HelloPayload& ack, const TaskInfo& task,
                             const TrainLoopConfig& config,
                             ProviderResult* partial) {
  config.Validate();
  const Matrix& semantics = Inbound(task.semantics, "semantics");
  if (ack.protocol != config.protocol) {
    throw ProtocolError("sentinel serves " + ProtocolName(ack.protocol));
  }
  if (ack.num_classes != semantics.rows()) {
    throw DimensionError("sentinel reports " + std::to_string(ack.num_classes) +
                         " classes, task has " +
                         std::to_string(semantics.rows()));
  }
  const std::vector<int>& classes = ack.classes;
  if (classes.empty()) throw ProtocolError("sentinel answers for no classes");
  for (int c : classes) CheckClass(semantics, c);

  ProviderResult local;
  ProviderResult& r = partial != nullptr ? *partial : local;
  r = ProviderResult{};
  Rng gen_init(config.seed, streams::kGeneratorInit);
  r.generator = GeneratorNet::Create(config.generator, semantics.cols(),
                                     ack.feature_dim, gen_init);
  r.student = CreateStudent(ack.feature_dim, ack.num_classes, config);
  Rng noise(config.seed, streams::kGeneratorNoise);
  Rng student_rng(config.seed, streams::kStudentBatches);
  AdamState gen_adam(r.generator.net, AdamConfig{.lr = config.lr});
  AdamState student_adam(r.student, AdamConfig{.lr = config.lr});
  const bool blackbox = config.protocol == ProtocolKind::kBlackbox;

  auto ask = [&](const Matrix& x, std::span<const int> labels) {
    FeedbackMessage fb = sentinel.Request(x, labels);
    Inbound(fb.softmax, "softmax");
    Inbound(fb.gradient, fb.gradient_field());
    return fb;
  };

  try {
    for (int epoch = 1; epoch <= config.generator_epochs; ++epoch) {
      GeneratorEpochLog entry;
      entry.epoch = epoch;
      std::size_t rows = 0;
      std::size_t kept = 0;
      for (int c : classes) {
        const int one[] = {c};
        std::vector<int> labels;
        auto acts = GenerateWithActs(r.generator, semantics, one,
                                     config.batch_size, noise, &labels);
        const Matrix& x = acts.back();
        const FeedbackMessage fb = ask(x, labels);
        const auto n = static_cast<double>(labels.size());
        entry.teacher_loss += MeanTeacherNll(fb.softmax, labels) * n;
        entry.reg_value += fb.reg_value * n;
        rows += labels.size();
        const auto argmax = RowArgmax(fb.softmax);

        Matrix grad_x;
        if (!blackbox) {
          grad_x = fb.gradient;
          for (std::size_t i = 0; i < labels.size(); ++i) {
            kept += static_cast<int>(argmax[i]) == labels[i];
          }
        } else {
          auto mask = std::make_unique<bool[]>(labels.size());
          std::size_t active = 0;
          for (std::size_t i = 0; i < labels.size(); ++i) {
            mask[i] = !config.verify || static_cast<int>(argmax[i]) == labels[i];
            active += mask[i];
          }
          kept += active;
          const auto s_acts = Forward(r.student, x);
          const auto l = SoftmaxSquaredError(
              s_acts.back(), fb.softmax,
              std::span<const bool>(mask.get(), labels.size()));
          entry.student_loss += l.loss * n;
          if (active == 0) {
            spdlog::warn("epoch {}: no verified rows for class {}, skipped",
                         epoch, c);
            grad_x = Matrix(x.rows(), x.cols());
          } else {
            auto s_back = Backward(r.student, s_acts, l.grad);
            AdamStep(r.student, s_back.grads, student_adam);
            grad_x = std::move(s_back.input_grad);
          }
          AddInPlace(grad_x, fb.gradient);
        }
        AdamStep(r.generator.net,
                 Backward(r.generator.net, acts, grad_x).grads, gen_adam);
      }
      const auto total = static_cast<double>(rows);
      entry.teacher_loss /= total;
      entry.reg_value /= total;
      entry.student_loss /= total;
      entry.verified_fraction = static_cast<double>(kept) / total;
      spdlog::debug("generator epoch {}: teacher_loss={:.4f} reg={:.4f} "
                    "verified={:.3f}",
                    epoch, entry.teacher_loss, entry.reg_value,
                    entry.verified_fraction);
      r.generator_log.push_back(entry);
    }

    // Distillation set: features_per_class rows per class.
    VerifiedBatch pool;
    pool.features = Matrix(0, ack.feature_dim);
    pool.teacher_softmax = Matrix(0, ack.num_classes);
    const std::size_t per_class = config.features_per_class;
    const std::size_t batches_needed =
        (per_class + config.batch_size - 1) / config.batch_size;
    const std::size_t max_batches =
        config.verify ? 4 * batches_needed : batches_needed;
    for (int c : classes) {
      const int one[] = {c};
      std::size_t have = 0;
      for (std::size_t b = 0; b < max_batches && have < per_class; ++b) {
        const GeneratedBatch batch = Synthesize(
            r.generator, semantics, one, config.batch_size, noise);
        const FeedbackMessage fb = ask(batch.features, batch.labels);
        r.generated_rows += batch.labels.size();
        const VerifiedBatch vb =
            config.verify
                ? VerifyLabels(batch.features, batch.labels, fb.softmax)
                : KeepAll(batch.features, batch.labels, fb.softmax);
        const std::size_t take = std::min(vb.size(), per_class - have);
        Append(pool, vb, take);
        have += take;
      }
      if (have == 0) {
        spdlog::warn("class {}: no verified features, left out of "
                     "distillation", c);
      }
    }
    r.verified_rows = pool.size();
    r.student_log = TrainStudent(r.student, pool, config, student_rng);
  } catch (const BudgetExceeded&) {
    r.budget_exhausted = true;
    throw;
  }
  return r;
}

}  // namespace sgzsl
