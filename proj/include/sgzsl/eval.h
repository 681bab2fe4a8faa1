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

#ifndef SGZSL_EVAL_H_
#define SGZSL_EVAL_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgzsl/dataset.h"
#include "sgzsl/mlp.h"
#include "sgzsl/provider.h"

namespace sgzsl {

// H = 2us / (u + s), with H(0, 0) = 0.
double HarmonicMean(double u, double s);

struct ClassAccuracy {
  int label = 0;
  std::size_t count = 0;
  double accuracy = 0.0;  // Percent.
};

// Mean over classes of per-class top-1 accuracy (percent). Only classes with
// at least one row in `truth` count.
double PerClassTop1(std::span<const int> truth, std::span<const int> pred,
                    std::vector<ClassAccuracy>* per_class = nullptr);

struct ZslMetrics {
  double u = 0.0;  // Unseen classes, prediction over the GZSL label space.
  double s = 0.0;  // Seen classes, same label space.
  double h = 0.0;
  double czsl_t1 = 0.0;  // Unseen rows, label space Y_u.
  std::vector<ClassAccuracy> per_class_unseen;
  std::vector<ClassAccuracy> per_class_seen;
};

// Omniscient mode: the student head with label spaces Y_s ∪ Y_u and Y_u.
ZslMetrics EvaluateStudent(const MlpModel& student, const ZslDataset& dataset,
                           TeacherMode mode);

// Quasi mode: the generator-trained classifiers C (one over Y_u for CZSL,
// one over all classes for GZSL).
ZslMetrics EvaluateClassifiers(const Classifier& czsl, const Classifier& gzsl,
                               const ZslDataset& dataset, TeacherMode mode);

struct TeacherMetrics {
  // Every output column competes.
  double seen_full = 0.0;
  double unseen_full = 0.0;
  // Argmax limited to the classes the teacher was trained on; an unseen row
  // can never be right here when those are the seen classes.
  double seen_restricted = 0.0;
  double unseen_restricted = 0.0;
  // Per-class top-1 over all evaluation rows, every column competing.
  double overall_full = 0.0;
};

TeacherMetrics EvaluateTeacher(const MlpModel& teacher,
                               std::span<const int> trained_classes,
                               const ZslDataset& dataset, TeacherMode mode);

// class,group,count,accuracy
std::string PerClassCsv(const ZslMetrics& metrics);

}  // namespace sgzsl

#endif  // SGZSL_EVAL_H_
