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

#include "sgzsl/model_io.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sgzsl/errors.h"

namespace sgzsl {
namespace {

using Json = nlohmann::ordered_json;

Json ModelJson(const MlpModel& model) {
  Json layers = Json::array();
  for (const auto& layer : model.layers()) {
    Json l;
    l["fan_in"] = layer.weight.rows();
    l["fan_out"] = layer.weight.cols();
    l["activation"] = ActivationName(layer.activation.kind);
    l["slope"] = layer.activation.slope;
    l["weight"] = layer.weight.values();
    l["bias"] = layer.bias;
    layers.push_back(std::move(l));
  }
  Json j;
  j["format"] = "sgzsl-mlp";
  j["layers"] = std::move(layers);
  return j;
}

MlpModel ModelFromJsonValue(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != "sgzsl-mlp") {
      throw ParseError("not an sgzsl model file");
    }
    std::vector<DenseLayer> layers;
    for (const auto& l : j.at("layers")) {
      const auto fan_in = l.at("fan_in").get<std::size_t>();
      const auto fan_out = l.at("fan_out").get<std::size_t>();
      auto weight = l.at("weight").get<std::vector<double>>();
      if (weight.size() != fan_in * fan_out) {
        throw ParseError("model layer weight has " +
                         std::to_string(weight.size()) + " values for " +
                         std::to_string(fan_in) + "x" +
                         std::to_string(fan_out));
      }
      DenseLayer layer;
      layer.weight = Matrix(fan_in, fan_out, std::move(weight));
      layer.bias = l.at("bias").get<std::vector<double>>();
      layer.activation.kind =
          ParseActivationKind(l.at("activation").get<std::string>());
      layer.activation.slope = l.at("slope").get<double>();
      layers.push_back(std::move(layer));
    }
    return MlpModel(std::move(layers));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
}

}  // namespace

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string ModelToJson(const MlpModel& model) {
  return ModelJson(model).dump();
}

MlpModel ModelFromJson(const std::string& json) {
  try {
    return ModelFromJsonValue(Json::parse(json));
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
}

void SaveModel(const MlpModel& model, const std::filesystem::path& path) {
  WriteFile(path, ModelToJson(model) + "\n");
}

MlpModel LoadModel(const std::filesystem::path& path) {
  return ModelFromJson(ReadFile(path));
}

std::string TeacherLogJsonLines(const TrainedTeacher& teacher) {
  std::string out;
  for (const auto& e : teacher.log) {
    Json j;
    j["epoch"] = e.epoch;
    j["loss"] = e.loss;
    j["accuracy"] = e.accuracy;
    if (e.epsilon) j["epsilon"] = *e.epsilon;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void SaveTeacher(const TrainedTeacher& teacher,
                 const std::filesystem::path& path) {
  Json j;
  j["format"] = "sgzsl-teacher";
  j["mode"] = TeacherModeName(teacher.mode);
  j["classes"] = teacher.classes;
  if (teacher.epsilon) {
    j["epsilon"] = *teacher.epsilon;
  } else {
    j["epsilon"] = nullptr;
  }
  j["model"] = ModelJson(teacher.model);
  WriteFile(path, j.dump() + "\n");
}

TrainedTeacher LoadTeacher(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(ReadFile(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "sgzsl-teacher") {
      throw ParseError(path.string() + ": not a teacher file");
    }
    TrainedTeacher t;
    t.mode = ParseTeacherMode(j.at("mode").get<std::string>());
    t.classes = j.at("classes").get<std::vector<int>>();
    if (!j.at("epsilon").is_null()) t.epsilon = j.at("epsilon").get<double>();
    t.model = ModelFromJsonValue(j.at("model"));
    SetModelOrigin(t.model, Origin::kOwnerData);
    return t;
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace sgzsl
