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

#ifndef SGZSL_DATASET_H_
#define SGZSL_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sgzsl/matrix.h"
#include "sgzsl/task.h"

namespace sgzsl {

// Omniscient teachers train on seen and unseen classes; quasi-omniscient
// teachers on seen classes only.
enum class TeacherMode { kOmniscient, kQuasiOmniscient };

std::string TeacherModeName(TeacherMode mode);
TeacherMode ParseTeacherMode(const std::string& name);

enum class Split : std::uint8_t {
  kTeacherTrainSeen,
  kTeacherTrainUnseen,
  kEvalSeen,
  kEvalUnseen,
};

std::string SplitName(Split split);
Split ParseSplit(const std::string& name);

enum class SourceKind : std::uint8_t { kReal, kSynthetic };

// Features, labels, and the class-level side information of a ZSL task.
// Class ids are row indices into `semantics`.
struct ZslDataset {
  Matrix features;  // n x d_x, tagged Origin::kOwnerData.
  std::vector<int> labels;
  Matrix semantics;  // num_classes x d_a
  std::vector<int> seen_classes;
  std::vector<int> unseen_classes;
  std::vector<Split> splits;
  std::vector<SourceKind> provenance;

  std::size_t num_rows() const { return labels.size(); }
  std::size_t num_classes() const { return semantics.rows(); }
  std::size_t feature_dim() const { return features.cols(); }
  std::size_t semantic_dim() const { return semantics.cols(); }
  bool IsUnseen(int label) const;

  // Throws DataError on any broken invariant (overlapping class sets,
  // labels without semantics, split/class disagreement, ragged columns).
  void Validate() const;
};

TaskInfo PublicTaskInfo(const ZslDataset& dataset);

// Row subset of a dataset. `row_ids` index the parent dataset.
struct DataView {
  Matrix features;
  std::vector<int> labels;
  std::vector<Split> splits;
  std::vector<std::size_t> row_ids;

  std::size_t size() const { return labels.size(); }
};

// Omniscient: teacher_train_seen + teacher_train_unseen. Quasi: seen only.
DataView TeacherView(const ZslDataset& dataset, TeacherMode mode);

enum class ClassGroup { kSeen, kUnseen };

// Evaluation rows for one class group. Under a quasi-omniscient teacher
// every unseen-class row is available for evaluation since none was used
// for training.
DataView EvalView(const ZslDataset& dataset, TeacherMode mode,
                  ClassGroup group);

struct SyntheticSpec {
  int num_seen = 10;
  int num_unseen = 3;
  int feature_dim = 32;
  int semantic_dim = 8;
  int samples_per_class = 200;
  double noise_std = 1.0;
  double semantic_scale = 1.0;
  // Added to W a before the ReLU so most feature units stay active.
  double feature_offset = 1.5;
  double teacher_train_fraction = 0.6;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Class semantics uniform on the sphere (times semantic_scale), one hidden
// Gaussian map W, features max(0, ReLU(W a_c + offset) + noise). Seen
// classes get ids [0, num_seen), unseen the rest.
ZslDataset GenerateSynthetic(const SyntheticSpec& spec);

struct SplitPlan {
  // Used only when the labels file carries no split column.
  std::vector<int> unseen_classes;
  double teacher_train_fraction = 0.6;
  std::uint64_t seed = 0;
};

struct DatasetPaths {
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path semantics;

  static DatasetPaths InDirectory(const std::filesystem::path& dir);
};

// features.csv: one sample per line, comma-separated decimals.
// labels.csv: "label" or "label,split" per line.
// semantics.csv: line i holds the embedding of class i.
ZslDataset LoadCsv(const DatasetPaths& paths, const SplitPlan& plan);

// Writes the layout LoadCsv reads, with split columns, shortest round-trip
// decimal formatting.
void ExportCsv(const ZslDataset& dataset, const DatasetPaths& paths);

}  // namespace sgzsl

#endif  // SGZSL_DATASET_H_
