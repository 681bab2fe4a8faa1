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

#ifndef SGZSL_TASK_H_
#define SGZSL_TASK_H_

#include <vector>

#include "sgzsl/matrix.h"

namespace sgzsl {

// What the provider is allowed to know: semantics and the class partition.
struct TaskInfo {
  Matrix semantics;  // num_classes x d_a, row i describes class i.
  std::vector<int> seen_classes;
  std::vector<int> unseen_classes;

  std::vector<int> AllClasses() const;
};

}  // namespace sgzsl

#endif  // SGZSL_TASK_H_
