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

// sgzsl: dataset generation, teacher pretraining, sentinel serving, protocol
// runs, evaluation and sweeps from one binary.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgzsl/config.h"
#include "sgzsl/errors.h"
#include "sgzsl/eval.h"
#include "sgzsl/model_io.h"
#include "sgzsl/pipeline.h"
#include "sgzsl/transport.h"
#include "spdlog/sinks/stdout_color_sinks.h"
#include "spdlog/spdlog.h"

namespace fs = std::filesystem;
using namespace sgzsl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitBudget = 4;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "Flat JSON run config");
  cmd->add_option("-s,--set", opts.sets,
                  "Override a config key, KEY=VALUE (repeatable)");
  cmd->add_option("--seed", opts.seed, "Seed for data, models and batches");
}

RunConfig BuildConfig(const CommonOptions& opts) {
  RunConfig config = opts.config_path.empty()
                         ? RunConfig{}
                         : RunConfig::Load(opts.config_path);
  for (const auto& kv : opts.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(kv, "expected KEY=VALUE");
    }
    config.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed) {
    config.seed = *opts.seed;
  }
  config.PropagateSeed();
  config.Validate();
  return config;
}

void SetupLogging() {
  auto logger = spdlog::stderr_color_mt("sgzsl");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("SGZSL_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level)
                          : spdlog::level::info);
}

std::vector<double> ParseDoubles(const std::string& csv, const char* field) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(field, "not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  for (double v : ParseDoubles(csv, "seeds")) {
    if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
      throw ConfigError("seeds", "seeds must be non-negative integers");
    }
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

int CmdGenData(const RunConfig& config, const std::string& out, bool force) {
  const DatasetPaths paths = DatasetPaths::InDirectory(out);
  if (!force) {
    for (const auto& p : {paths.features, paths.labels, paths.semantics}) {
      if (fs::exists(p)) {
        throw ConfigError("out", p.string() +
                                     " exists; pass --force to overwrite");
      }
    }
  }
  fs::create_directories(out);
  const ZslDataset data = GenerateSynthetic(config.synthetic);
  ExportCsv(data, paths);
  spdlog::info("wrote {} rows ({} seen, {} unseen classes) to {}",
               data.num_rows(), data.seen_classes.size(),
               data.unseen_classes.size(), out);
  return kExitOk;
}

int CmdPretrain(const RunConfig& config, const std::string& out,
                const std::string& log_path) {
  const ZslDataset data = LoadDataset(config);
  const TrainedTeacher teacher = TrainTeacher(data, config);
  SaveTeacher(teacher, out);
  WriteFile(log_path.empty() ? out + ".log.jsonl" : log_path,
            TeacherLogJsonLines(teacher));
  const TeacherMetrics m =
      EvaluateTeacher(teacher.model, teacher.classes, data, config.teacher_mode);
  nlohmann::ordered_json j;
  j["mode"] = TeacherModeName(teacher.mode);
  j["seen_full"] = m.seen_full;
  j["unseen_full"] = m.unseen_full;
  j["seen_restricted_head"] = m.seen_restricted;
  j["unseen_restricted_head"] = m.unseen_restricted;
  if (teacher.epsilon) j["epsilon"] = *teacher.epsilon;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int CmdServe(const RunConfig& config, const std::string& teacher_path,
             const std::string& port_file) {
  const ZslDataset data = LoadDataset(config);
  TrainedTeacher teacher = LoadTeacher(teacher_path);
  TcpListener listener(config.host, config.port);
  spdlog::info("sentinel listening on {}:{}", config.host, listener.port());
  if (!port_file.empty()) {
    const std::string tmp = port_file + ".tmp";
    WriteFile(tmp, std::to_string(listener.port()) + "\n");
    fs::rename(tmp, port_file);
  }
  SocketChannel conn = listener.Accept();
  ServeSentinel(config, data, std::move(teacher), conn);
  return kExitOk;
}

// Starts `serve-sentinel` as a child process and waits for its port.
pid_t SpawnSentinel(const fs::path& config_path, const fs::path& teacher_path,
                    const fs::path& port_file, std::uint16_t* port) {
  fs::remove(port_file);
  const pid_t pid = ::fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    std::vector<std::string> args = {"sgzsl",        "serve-sentinel",
                                     "--config",     config_path.string(),
                                     "--teacher",    teacher_path.string(),
                                     "--port-file",  port_file.string(),
                                     "--set",        "port=0"};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    ::execv("/proc/self/exe", argv.data());
    std::perror("execv");
    std::_Exit(127);
  }
  for (int i = 0; i < 600; ++i) {
    if (fs::exists(port_file)) {
      *port = static_cast<std::uint16_t>(std::stoi(ReadFile(port_file)));
      return pid;
    }
    int status = 0;
    if (::waitpid(pid, &status, WNOHANG) == pid) {
      throw ConnectionError("sentinel process exited before listening");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  ::kill(pid, SIGTERM);
  throw ConnectionError("timed out waiting for the sentinel process");
}

int CmdRun(RunConfig config, const std::string& teacher_path,
           const std::string& out_override) {
  if (!out_override.empty()) config.output_dir = out_override;
  const fs::path out = config.output_dir;
  fs::create_directories(out);
  const ZslDataset data = LoadDataset(config);
  TrainedTeacher teacher;
  fs::path teacher_file = teacher_path;
  if (teacher_path.empty()) {
    teacher = TrainTeacher(data, config);
    teacher_file = out / "teacher.json";
    SaveTeacher(teacher, teacher_file);
    WriteFile(out / "teacher_log.jsonl", TeacherLogJsonLines(teacher));
  } else {
    teacher = LoadTeacher(teacher_path);
  }

  pid_t child = -1;
  if (config.transport == TransportKind::kTcp && config.port == 0) {
    const fs::path config_file = out / "effective_config.json";
    WriteFile(config_file, config.ToJson() + "\n");
    std::uint16_t port = 0;
    child = SpawnSentinel(config_file, teacher_file, out / "sentinel.port",
                          &port);
    config.port = port;
  }
  RunResult result;
  try {
    result = RunExperiment(config, data, teacher);
  } catch (...) {
    if (child > 0) {
      ::kill(child, SIGTERM);
      ::waitpid(child, nullptr, 0);
    }
    throw;
  }
  if (child > 0) {
    int status = 0;
    ::waitpid(child, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      spdlog::warn("sentinel process exited with status {}", status);
    }
    config.port = 0;
    result.config = config;
  }
  result.Save(out);
  std::cout << result.ReportJson() << "\n";
  return result.budget_exhausted ? kExitBudget : kExitOk;
}

int CmdEval(const RunConfig& config, const std::string& model_path,
            const std::string& teacher_path) {
  const ZslDataset data = LoadDataset(config);
  nlohmann::ordered_json j;
  if (!teacher_path.empty()) {
    const TrainedTeacher t = LoadTeacher(teacher_path);
    const TeacherMetrics m =
        EvaluateTeacher(t.model, t.classes, data, t.mode);
    j["teacher"] = {{"seen_full", m.seen_full},
                    {"unseen_full", m.unseen_full},
                    {"overall_full", m.overall_full},
                    {"seen_restricted_head", m.seen_restricted},
                    {"unseen_restricted_head", m.unseen_restricted}};
  }
  if (!model_path.empty()) {
    const MlpModel student = LoadModel(model_path);
    const ZslMetrics m = EvaluateStudent(student, data, config.teacher_mode);
    j["student"] = {{"u", m.u}, {"s", m.s}, {"h", m.h}, {"czsl_t1", m.czsl_t1}};
  }
  if (j.empty()) throw ConfigError("model", "pass --model and/or --teacher");
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int CmdSweep(const RunConfig& config, const std::string& axis,
             const std::string& values, const std::string& seeds,
             bool teacher_only, const std::string& out) {
  const auto v = ParseDoubles(values, "values");
  const auto s = ParseSeeds(seeds);
  const auto rows = RunSweep(config, axis, v, s, teacher_only);
  const std::string csv = SweepCsv(axis, rows);
  if (out.empty()) {
    std::cout << csv;
  } else {
    WriteFile(out, csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  SetupLogging();
  CLI::App app{"Sentinel-guided zero-shot learning"};
  app.require_subcommand(1);

  CommonOptions gen_opts, pre_opts, serve_opts, run_opts, eval_opts,
      sweep_opts;
  std::string gen_out = "data";
  bool gen_force = false;
  auto* gen = app.add_subcommand("gen-data", "Write the synthetic dataset");
  AddCommon(gen, gen_opts);
  gen->add_option("-o,--out", gen_out, "Output directory");
  gen->add_flag("--force", gen_force, "Overwrite existing files");

  std::string pre_out = "teacher.json", pre_log;
  auto* pre = app.add_subcommand("pretrain-teacher", "Train the teacher");
  AddCommon(pre, pre_opts);
  pre->add_option("-o,--out", pre_out, "Teacher model file");
  pre->add_option("--log", pre_log, "Per-epoch JSON log");

  std::string serve_teacher, port_file;
  auto* serve = app.add_subcommand("serve-sentinel",
                                   "Answer one provider session over TCP");
  AddCommon(serve, serve_opts);
  serve->add_option("-t,--teacher", serve_teacher, "Teacher model file")
      ->required();
  serve->add_option("--port-file", port_file,
                    "Write the bound port here once listening");

  std::string run_teacher, run_out;
  auto* run = app.add_subcommand("run", "Train generator and student");
  AddCommon(run, run_opts);
  run->add_option("-t,--teacher", run_teacher,
                  "Pretrained teacher (trained on the fly if omitted)");
  run->add_option("-o,--out", run_out, "Output directory");

  std::string eval_model, eval_teacher;
  auto* eval = app.add_subcommand("eval", "Evaluate saved models");
  AddCommon(eval, eval_opts);
  eval->add_option("-m,--model", eval_model, "Student model file");
  eval->add_option("-t,--teacher", eval_teacher, "Teacher model file");

  std::string axis, values, seeds = "0,1,2", sweep_out;
  bool teacher_only = false;
  auto* sweep = app.add_subcommand("sweep", "Seed-averaged parameter sweep");
  AddCommon(sweep, sweep_opts);
  sweep->add_option("--axis", axis, "noise_dim, alpha or sigma_n")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--seeds", seeds, "Comma-separated seeds");
  sweep->add_flag("--teacher-only", teacher_only, "Skip the provider stage");
  sweep->add_option("-o,--out", sweep_out, "CSV output (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return CmdGenData(BuildConfig(gen_opts), gen_out, gen_force);
    if (*pre) return CmdPretrain(BuildConfig(pre_opts), pre_out, pre_log);
    if (*serve) {
      return CmdServe(BuildConfig(serve_opts), serve_teacher, port_file);
    }
    if (*run) return CmdRun(BuildConfig(run_opts), run_teacher, run_out);
    if (*eval) {
      return CmdEval(BuildConfig(eval_opts), eval_model, eval_teacher);
    }
    if (*sweep) {
      return CmdSweep(BuildConfig(sweep_opts), axis, values, seeds,
                      teacher_only, sweep_out);
    }
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    spdlog::error("budget exhausted: {}", e.what());
    return kExitBudget;
  } catch (const ProtocolError& e) {
    spdlog::error("protocol error: {}", e.what());
    return kExitProtocol;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
