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

#ifndef SGZSL_PIPELINE_H_
#define SGZSL_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgzsl/config.h"
#include "sgzsl/dataset.h"
#include "sgzsl/eval.h"
#include "sgzsl/provider.h"
#include "sgzsl/sentinel.h"
#include "sgzsl/session.h"
#include "sgzsl/transport.h"

namespace sgzsl {

struct RunResult {
  RunConfig config;
  TeacherMetrics teacher;
  std::optional<double> teacher_epsilon;
  ProviderResult provider;
  SessionLog session;
  std::optional<ZslMetrics> metrics;  // Absent when the budget ran out.
  std::optional<double> classifier_train_accuracy;  // Quasi mode only.
  bool budget_exhausted = false;

  // Effective config, teacher/student metrics and session totals.
  std::string ReportJson() const;
  // report.json, per_class.csv, session_log.jsonl, models and epoch logs.
  void Save(const std::filesystem::path& dir) const;
};

// Synthetic benchmark unless `data_dir` points at a CSV dataset.
ZslDataset LoadDataset(const RunConfig& config);

TrainedTeacher TrainTeacher(const ZslDataset& dataset, const RunConfig& config);

// Sentinel side: answers one session on `channel`.
void ServeSentinel(const RunConfig& config, const ZslDataset& dataset,
                   TrainedTeacher teacher, Channel& channel);

// Provider side over an already-open channel; the teacher is only used for
// the teacher rows of the report.
RunResult RunOverChannel(const RunConfig& config, const ZslDataset& dataset,
                         const TrainedTeacher& teacher, Channel& channel);

// Full run. In-process: the sentinel is called synchronously. TCP with
// port 0: a sentinel thread listens on an ephemeral local port. TCP with a
// port: connects to a sentinel served elsewhere.
RunResult RunExperiment(const RunConfig& config, const ZslDataset& dataset,
                        const TrainedTeacher& teacher);

struct SweepRow {
  double value = 0.0;
  std::size_t seeds = 0;
  double teacher_accuracy = 0.0;
  double u = 0.0;
  double s = 0.0;
  double h = 0.0;
  double czsl_t1 = 0.0;
  std::optional<double> epsilon;
};

// Seed-averaged metrics for each value of `axis` (noise_dim, alpha or
// sigma_n). With teacher_only, the provider stage is skipped.
std::vector<SweepRow> RunSweep(const RunConfig& base, const std::string& axis,
                               std::span<const double> values,
                               std::span<const std::uint64_t> seeds,
                               bool teacher_only);

std::string SweepCsv(const std::string& axis, std::span<const SweepRow> rows);

}  // namespace sgzsl

#endif  // SGZSL_PIPELINE_H_
