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

#ifndef SGZSL_MODEL_IO_H_
#define SGZSL_MODEL_IO_H_

#include <filesystem>
#include <string>

#include "sgzsl/mlp.h"
#include "sgzsl/sentinel.h"

namespace sgzsl {

// JSON with shortest round-trip doubles, so a save/load cycle is exact.
std::string ModelToJson(const MlpModel& model);
MlpModel ModelFromJson(const std::string& json);

void SaveModel(const MlpModel& model, const std::filesystem::path& path);
MlpModel LoadModel(const std::filesystem::path& path);

// Teacher file: model plus mode, class list and training log.
void SaveTeacher(const TrainedTeacher& teacher,
                 const std::filesystem::path& path);
TrainedTeacher LoadTeacher(const std::filesystem::path& path);

// One JSON object per epoch.
std::string TeacherLogJsonLines(const TrainedTeacher& teacher);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& text);

}  // namespace sgzsl

#endif  // SGZSL_MODEL_IO_H_
