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

#include "sgzsl/pipeline.h"

#include <cstdio>
#include <thread>

#include "json.hpp"
#include "sgzsl/errors.h"
#include "sgzsl/model_io.h"
#include "spdlog/spdlog.h"

namespace sgzsl {
namespace {

using Json = nlohmann::ordered_json;

Json MetricsJson(const ZslMetrics& m) {
  Json j;
  j["u"] = m.u;
  j["s"] = m.s;
  j["h"] = m.h;
  j["czsl_t1"] = m.czsl_t1;
  return j;
}

std::string SessionId(const RunConfig& config) {
  return "run-" + std::to_string(config.seed);
}

}  // namespace

ZslDataset LoadDataset(const RunConfig& config) {
  if (config.data_dir.empty()) return GenerateSynthetic(config.synthetic);
  SplitPlan plan;
  plan.teacher_train_fraction = config.synthetic.teacher_train_fraction;
  plan.seed = config.seed;
  return LoadCsv(DatasetPaths::InDirectory(config.data_dir), plan);
}

TrainedTeacher TrainTeacher(const ZslDataset& dataset,
                            const RunConfig& config) {
  return PretrainTeacher(dataset, config.teacher_mode, config.teacher);
}

void ServeSentinel(const RunConfig& config, const ZslDataset& dataset,
                   TrainedTeacher teacher, Channel& channel) {
  Sentinel sentinel(std::move(teacher), dataset, MakeSentinelConfig(config));
  SentinelEndpoint endpoint(sentinel, config.protocol);
  endpoint.Serve(channel);
  spdlog::info("sentinel: session closed after {} answered requests",
               sentinel.answered());
}

RunResult RunOverChannel(const RunConfig& config, const ZslDataset& dataset,
                         const TrainedTeacher& teacher, Channel& channel) {
  config.Validate();
  RunResult result;
  result.config = config;
  result.teacher =
      EvaluateTeacher(teacher.model, teacher.classes, dataset, config.teacher_mode);
  result.teacher_epsilon = teacher.epsilon;

  const TaskInfo task = PublicTaskInfo(dataset);
  RemoteSentinel remote(channel, SessionId(config));
  HelloPayload hello;
  hello.protocol = config.protocol;
  hello.feature_dim = dataset.feature_dim();
  hello.num_classes = dataset.num_classes();
  hello.alpha = config.alpha;
  hello.budget = config.budget;
  HelloPayload ack;
  try {
    ack = remote.Handshake(hello);
  } catch (...) {
    result.session = remote.log();
    throw;
  }
  if (ack.alpha != config.alpha) {
    spdlog::warn("sentinel uses alpha={} (requested {})", ack.alpha,
                 config.alpha);
  }

  try {
    TrainProvider(remote, ack, task, config.loop, &result.provider);
  } catch (const BudgetExceeded& e) {
    spdlog::warn("provider: {}", e.what());
    result.budget_exhausted = true;
    result.session = remote.log();
    return result;
  }
  result.session = remote.log();

  if (config.teacher_mode == TeacherMode::kQuasiOmniscient) {
    const Classifier czsl = TrainUnseenClassifier(
        result.provider.generator, task.semantics, task.unseen_classes,
        config.loop, nullptr);
    double acc = 0.0;
    const Classifier gzsl =
        TrainUnseenClassifier(result.provider.generator, task.semantics,
                              task.AllClasses(), config.loop, &acc);
    result.classifier_train_accuracy = acc;
    result.metrics =
        EvaluateClassifiers(czsl, gzsl, dataset, config.teacher_mode);
  } else {
    result.metrics =
        EvaluateStudent(result.provider.student, dataset, config.teacher_mode);
  }
  return result;
}

RunResult RunExperiment(const RunConfig& config, const ZslDataset& dataset,
                        const TrainedTeacher& teacher) {
  config.Validate();
  if (config.transport == TransportKind::kInProcess) {
    Sentinel sentinel(teacher, dataset, MakeSentinelConfig(config));
    SentinelEndpoint endpoint(sentinel, config.protocol);
    InProcessChannel channel(endpoint);
    return RunOverChannel(config, dataset, teacher, channel);
  }
  if (config.port != 0) {
    SocketChannel channel = ConnectTcp(config.host, config.port);
    return RunOverChannel(config, dataset, teacher, channel);
  }

  // Local sentinel thread. It owns its state outright; only the listener's
  // port crosses over before the session starts.
  TcpListener listener(config.host, 0);
  std::exception_ptr server_error;
  std::thread server([&] {
    try {
      SocketChannel conn = listener.Accept();
      ServeSentinel(config, dataset, teacher, conn);
    } catch (...) {
      server_error = std::current_exception();
    }
  });
  RunResult result;
  try {
    SocketChannel channel = ConnectTcp(config.host, listener.port());
    result = RunOverChannel(config, dataset, teacher, channel);
  } catch (...) {
    server.join();
    throw;
  }
  server.join();
  if (server_error) std::rethrow_exception(server_error);
  return result;
}

std::string RunResult::ReportJson() const {
  Json j;
  j["config"] = Json::parse(config.ToJson());
  Json t;
  t["seen_full"] = teacher.seen_full;
  t["unseen_full"] = teacher.unseen_full;
  t["overall_full"] = teacher.overall_full;
  t["seen_restricted_head"] = teacher.seen_restricted;
  t["unseen_restricted_head"] = teacher.unseen_restricted;
  if (teacher_epsilon) {
    t["epsilon"] = *teacher_epsilon;
  } else {
    t["epsilon"] = nullptr;
  }
  j["teacher"] = t;
  j["budget_exhausted"] = budget_exhausted;
  if (metrics) {
    j["metrics"] = MetricsJson(*metrics);
  } else {
    j["metrics"] = nullptr;
  }
  if (classifier_train_accuracy) {
    j["classifier_train_accuracy"] = *classifier_train_accuracy;
  }
  Json p;
  p["generated_rows"] = provider.generated_rows;
  p["verified_rows"] = provider.verified_rows;
  p["verified_fraction"] =
      provider.generated_rows == 0
          ? 0.0
          : static_cast<double>(provider.verified_rows) /
                static_cast<double>(provider.generated_rows);
  Json glog = Json::array();
  for (const auto& e : provider.generator_log) {
    Json row;
    row["epoch"] = e.epoch;
    row["teacher_loss"] = e.teacher_loss;
    row["reg_value"] = e.reg_value;
    row["student_loss"] = e.student_loss;
    row["verified_fraction"] = e.verified_fraction;
    glog.push_back(row);
  }
  p["generator_log"] = glog;
  Json slog = Json::array();
  for (const auto& e : provider.student_log) {
    Json row;
    row["epoch"] = e.epoch;
    row["loss"] = e.loss;
    slog.push_back(row);
  }
  p["student_log"] = slog;
  j["provider"] = p;
  Json s;
  s["messages"] = session.entries().size();
  s["feedback_messages"] = session.feedback_count();
  s["uploaded_bytes"] = session.uploaded_bytes();
  s["downloaded_bytes"] = session.downloaded_bytes();
  s["mid_risk_fields"] = session.mid_risk_fields();
  j["session"] = s;
  return j.dump(2);
}

void RunResult::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  WriteFile(dir / "report.json", ReportJson() + "\n");
  session.Save(dir / "session_log.jsonl");
  if (metrics) WriteFile(dir / "per_class.csv", PerClassCsv(*metrics));
  if (provider.generator.net.num_layers() > 0) {
    SaveModel(provider.generator.net, dir / "generator.json");
  }
  if (provider.student.num_layers() > 0) {
    SaveModel(provider.student, dir / "student.json");
  }
}

std::vector<SweepRow> RunSweep(const RunConfig& base, const std::string& axis,
                               std::span<const double> values,
                               std::span<const std::uint64_t> seeds,
                               bool teacher_only) {
  if (axis != "noise_dim" && axis != "alpha" && axis != "sigma_n") {
    throw ConfigError("axis", "expected noise_dim, alpha or sigma_n, got '" +
                                  axis + "'");
  }
  if (values.empty()) throw ConfigError("values", "need at least one value");
  if (seeds.empty()) throw ConfigError("seeds", "need at least one seed");
  std::vector<SweepRow> rows;
  for (double value : values) {
    SweepRow row;
    row.value = value;
    double eps_sum = 0.0;
    for (std::uint64_t seed : seeds) {
      RunConfig c = base;
      c.seed = seed;
      c.PropagateSeed();
      if (axis == "noise_dim") {
        if (value < 1.0 || value != static_cast<double>(
                                        static_cast<std::size_t>(value))) {
          throw ConfigError("values", "noise_dim must be a positive integer");
        }
        c.loop.generator.noise_dim = static_cast<std::size_t>(value);
      } else if (axis == "alpha") {
        c.alpha = value;
      } else {
        c.teacher.dp.enabled = true;
        c.teacher.dp.noise_scale = value;
      }
      c.Validate();
      const ZslDataset data = LoadDataset(c);
      const TrainedTeacher teacher = TrainTeacher(data, c);
      const TeacherMetrics tm =
          EvaluateTeacher(teacher.model, teacher.classes, data, c.teacher_mode);
      row.teacher_accuracy += tm.overall_full;
      if (teacher.epsilon) eps_sum += *teacher.epsilon;
      if (!teacher_only) {
        const RunResult r = RunExperiment(c, data, teacher);
        if (!r.metrics) throw BudgetExceeded("sweep run ran out of budget");
        row.u += r.metrics->u;
        row.s += r.metrics->s;
        row.h += r.metrics->h;
        row.czsl_t1 += r.metrics->czsl_t1;
      }
      ++row.seeds;
    }
    const auto n = static_cast<double>(row.seeds);
    row.teacher_accuracy /= n;
    row.u /= n;
    row.s /= n;
    row.h /= n;
    row.czsl_t1 /= n;
    if (axis == "sigma_n" || base.teacher.dp.enabled) row.epsilon = eps_sum / n;
    rows.push_back(row);
  }
  return rows;
}

std::string SweepCsv(const std::string& axis, std::span<const SweepRow> rows) {
  std::string out =
      axis + ",seeds,teacher_accuracy,u,s,h,czsl_t1,epsilon\n";
  char buf[256];
  for (const auto& r : rows) {
    std::string eps = "";
    if (r.epsilon) {
      char e[64];
      std::snprintf(e, sizeof(e), "%.6g", *r.epsilon);
      eps = e;
    }
    std::snprintf(buf, sizeof(buf), "%g,%zu,%.4f,%.4f,%.4f,%.4f,%.4f,%s\n",
                  r.value, r.seeds, r.teacher_accuracy, r.u, r.s, r.h,
                  r.czsl_t1, eps.c_str());
    out += buf;
  }
  return out;
}

}  // namespace sgzsl
