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

// Python bindings: configuration, full runs, sweeps and the metric helpers.
// Structured results cross the boundary as the same JSON the CLI writes.

#include <cstdint>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sgzsl/config.h"
#include "sgzsl/dp.h"
#include "sgzsl/errors.h"
#include "sgzsl/eval.h"
#include "sgzsl/pipeline.h"

namespace py = pybind11;

namespace sgzsl {
namespace {

RunConfig ConfigFrom(const std::string& json) {
  RunConfig c = RunConfig::FromJson(json);
  c.PropagateSeed();
  c.Validate();
  return c;
}

py::array_t<double> ToArray(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

std::string Run(const std::string& json) {
  const RunConfig c = ConfigFrom(json);
  py::gil_scoped_release release;
  const ZslDataset data = LoadDataset(c);
  const TrainedTeacher teacher = TrainTeacher(data, c);
  return RunExperiment(c, data, teacher).ReportJson();
}

std::string Sweep(const std::string& json, const std::string& axis,
                  const std::vector<double>& values,
                  const std::vector<std::uint64_t>& seeds, bool teacher_only) {
  const RunConfig c = ConfigFrom(json);
  py::gil_scoped_release release;
  return SweepCsv(axis, RunSweep(c, axis, values, seeds, teacher_only));
}

py::dict Dataset(const std::string& json) {
  const RunConfig c = ConfigFrom(json);
  const ZslDataset d = LoadDataset(c);
  py::dict out;
  out["features"] = ToArray(d.features);
  out["labels"] = py::array_t<int>(d.labels.size(), d.labels.data());
  out["semantics"] = ToArray(d.semantics);
  out["seen_classes"] = d.seen_classes;
  out["unseen_classes"] = d.unseen_classes;
  return out;
}

double Epsilon(double noise_scale, double delta, double sample_rate,
               std::uint64_t steps) {
  DpConfig dp;
  dp.enabled = true;
  dp.noise_scale = noise_scale;
  dp.delta = delta;
  dp.sample_rate = sample_rate;
  dp.steps = steps;
  dp.Validate();
  return PrivacyReport(dp);
}

}  // namespace
}  // namespace sgzsl

PYBIND11_MODULE(_sgzsl, m) {
  m.doc() = "Sentinel-guided zero-shot learning core";

  auto base = py::register_exception<sgzsl::Error>(m, "Error");
  py::register_exception<sgzsl::ConfigError>(m, "ConfigError", base);
  py::register_exception<sgzsl::DataError>(m, "DataError", base);
  py::register_exception<sgzsl::ProtocolError>(m, "ProtocolError", base);
  py::register_exception<sgzsl::BudgetExceeded>(m, "BudgetExceeded", base);

  m.def("effective_config",
        [](const std::string& json) { return sgzsl::ConfigFrom(json).ToJson(); },
        py::arg("config_json"),
        "Validated configuration with every default filled in, as JSON.");
  m.def("run", &sgzsl::Run, py::arg("config_json"),
        "Trains the teacher, runs one session and returns report JSON.");
  m.def("sweep", &sgzsl::Sweep, py::arg("config_json"), py::arg("axis"),
        py::arg("values"), py::arg("seeds"), py::arg("teacher_only") = false,
        "Seed-averaged metrics per axis value, as CSV text.");
  m.def("dataset", &sgzsl::Dataset, py::arg("config_json"),
        "Features, labels and class splits of the configured dataset.");
  m.def("harmonic_mean", &sgzsl::HarmonicMean, py::arg("u"), py::arg("s"));
  m.def("privacy_epsilon", &sgzsl::Epsilon, py::arg("noise_scale"),
        py::arg("delta"), py::arg("sample_rate"), py::arg("steps"));
}
