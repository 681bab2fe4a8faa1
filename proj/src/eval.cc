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

#include "sgzsl/eval.h"

#include <algorithm>
#include <cstdio>
#include <functional>

#include "sgzsl/errors.h"

namespace sgzsl {
namespace {

std::vector<int> Concat(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out = a;
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

using PredictFn = std::function<std::vector<int>(const Matrix&)>;

ZslMetrics Collect(const ZslDataset& dataset, TeacherMode mode,
                   const PredictFn& predict_gzsl,
                   const PredictFn& predict_czsl) {
  const DataView unseen = EvalView(dataset, mode, ClassGroup::kUnseen);
  const DataView seen = EvalView(dataset, mode, ClassGroup::kSeen);
  ZslMetrics m;
  if (unseen.size() > 0) {
    m.u = PerClassTop1(unseen.labels, predict_gzsl(unseen.features),
                       &m.per_class_unseen);
    m.czsl_t1 = PerClassTop1(unseen.labels, predict_czsl(unseen.features));
  }
  if (seen.size() > 0) {
    m.s = PerClassTop1(seen.labels, predict_gzsl(seen.features),
                       &m.per_class_seen);
  }
  m.h = HarmonicMean(m.u, m.s);
  return m;
}

double Accuracy(std::span<const int> truth, std::span<const int> pred) {
  if (truth.empty()) return 0.0;
  return PerClassTop1(truth, pred);
}

}  // namespace

double HarmonicMean(double u, double s) {
  if (u + s <= 0.0) return 0.0;
  return 2.0 * u * s / (u + s);
}

double PerClassTop1(std::span<const int> truth, std::span<const int> pred,
                    std::vector<ClassAccuracy>* per_class) {
  if (truth.size() != pred.size()) {
    throw DimensionError("PerClassTop1: " + std::to_string(truth.size()) +
                         " labels, " + std::to_string(pred.size()) +
                         " predictions");
  }
  std::map<int, std::pair<std::size_t, std::size_t>> tally;  // hits, total
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto& t = tally[truth[i]];
    t.first += truth[i] == pred[i];
    ++t.second;
  }
  if (per_class != nullptr) per_class->clear();
  if (tally.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [label, t] : tally) {
    const double acc = 100.0 * static_cast<double>(t.first) /
                       static_cast<double>(t.second);
    sum += acc;
    if (per_class != nullptr) per_class->push_back({label, t.second, acc});
  }
  return sum / static_cast<double>(tally.size());
}

ZslMetrics EvaluateStudent(const MlpModel& student, const ZslDataset& dataset,
                           TeacherMode mode) {
  const std::vector<int> all =
      Concat(dataset.seen_classes, dataset.unseen_classes);
  const std::vector<int>& unseen = dataset.unseen_classes;
  return Collect(
      dataset, mode,
      [&](const Matrix& x) { return Predict(student, x, all); },
      [&](const Matrix& x) { return Predict(student, x, unseen); });
}

ZslMetrics EvaluateClassifiers(const Classifier& czsl, const Classifier& gzsl,
                               const ZslDataset& dataset, TeacherMode mode) {
  const std::vector<int> all =
      Concat(dataset.seen_classes, dataset.unseen_classes);
  const std::vector<int>& unseen = dataset.unseen_classes;
  return Collect(
      dataset, mode,
      [&](const Matrix& x) { return Predict(gzsl, x, all); },
      [&](const Matrix& x) { return Predict(czsl, x, unseen); });
}

TeacherMetrics EvaluateTeacher(const MlpModel& teacher,
                               std::span<const int> trained_classes,
                               const ZslDataset& dataset, TeacherMode mode) {
  const std::vector<int> all =
      Concat(dataset.seen_classes, dataset.unseen_classes);
  const DataView unseen = EvalView(dataset, mode, ClassGroup::kUnseen);
  const DataView seen = EvalView(dataset, mode, ClassGroup::kSeen);
  TeacherMetrics m;
  m.seen_full = Accuracy(seen.labels, Predict(teacher, seen.features, all));
  m.unseen_full =
      Accuracy(unseen.labels, Predict(teacher, unseen.features, all));
  {
    std::vector<int> truth = seen.labels;
    truth.insert(truth.end(), unseen.labels.begin(), unseen.labels.end());
    std::vector<int> pred = Predict(teacher, VStack(seen.features,
                                                    unseen.features), all);
    m.overall_full = Accuracy(truth, pred);
  }
  m.seen_restricted = Accuracy(
      seen.labels, Predict(teacher, seen.features, trained_classes));
  m.unseen_restricted = Accuracy(
      unseen.labels, Predict(teacher, unseen.features, trained_classes));
  return m;
}

std::string PerClassCsv(const ZslMetrics& metrics) {
  std::string out = "class,group,count,accuracy\n";
  char buf[96];
  auto emit = [&](const std::vector<ClassAccuracy>& rows, const char* group) {
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%d,%s,%zu,%.4f\n", r.label, group,
                    r.count, r.accuracy);
      out += buf;
    }
  };
  emit(metrics.per_class_seen, "seen");
  emit(metrics.per_class_unseen, "unseen");
  return out;
}

}  // namespace sgzsl
