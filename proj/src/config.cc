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

#include "sgzsl/config.h"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "sgzsl/errors.h"
#include "sgzsl/model_io.h"

namespace sgzsl {
namespace {

using Json = nlohmann::ordered_json;

double GetDouble(const Json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") {
      return std::numeric_limits<double>::infinity();
    }
  }
  throw ConfigError(key, "expected a number, got " + v.dump());
}

std::uint64_t GetUnsigned(const Json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return v.get<std::uint64_t>();
  }
  throw ConfigError(key, "expected a non-negative integer, got " + v.dump());
}

int GetInt(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw ConfigError(key, "expected an integer, got " + v.dump());
  }
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() ||
      x > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "out of range");
  }
  return static_cast<int>(x);
}

bool GetBool(const Json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string GetString(const Json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::size_t> GetSizes(const Json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key, "expected a list of integers");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(GetUnsigned(e, key));
  return out;
}

std::vector<double> GetDoubles(const Json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(GetDouble(e, key));
  return out;
}

Json Number(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}

template <typename Parse>
auto ParseEnum(const Json& v, const std::string& key, Parse parse) {
  const std::string s = GetString(v, key);
  try {
    return parse(s);
  } catch (const Error& e) {
    throw ConfigError(key, "invalid value '" + s + "'");
  }
}

void ApplyFullScale(RunConfig& c) {
  c.teacher.hidden = {1024, 512};
  c.loop.student_hidden = {1024, 512};
  c.loop.generator.hidden = 4096;
  c.loop.lr = 1e-5;
}

void Apply(RunConfig& c, const std::string& key, const Json& v) {
  if (key == "protocol") {
    c.protocol = ParseEnum(v, key, ParseProtocol);
    c.loop.protocol = c.protocol;
  } else if (key == "teacher_mode") {
    c.teacher_mode = ParseEnum(v, key, ParseTeacherMode);
  } else if (key == "regularizer") {
    const auto tag = ParseEnum(v, key, ParseRegularizerTag);
    c.regularizer.tag = tag;
  } else if (key == "mmd_bandwidths") {
    c.regularizer.bandwidths = GetDoubles(v, key);
  } else if (key == "alpha") {
    c.alpha = GetDouble(v, key);
  } else if (key == "dp") {
    c.teacher.dp.enabled = GetBool(v, key);
  } else if (key == "sigma_n") {
    c.teacher.dp.noise_scale = GetDouble(v, key);
  } else if (key == "grad_clip") {
    c.teacher.dp.grad_clip = GetDouble(v, key);
  } else if (key == "weight_clip") {
    c.teacher.dp.weight_clip = GetDouble(v, key);
  } else if (key == "delta") {
    c.teacher.dp.delta = GetDouble(v, key);
  } else if (key == "teacher_epochs") {
    c.teacher.epochs = GetInt(v, key);
  } else if (key == "teacher_batch_size") {
    c.teacher.batch_size = GetUnsigned(v, key);
  } else if (key == "teacher_lr") {
    c.teacher.lr = GetDouble(v, key);
  } else if (key == "teacher_hidden") {
    c.teacher.hidden = GetSizes(v, key);
  } else if (key == "generator_epochs") {
    c.loop.generator_epochs = GetInt(v, key);
  } else if (key == "student_epochs") {
    c.loop.student_epochs = GetInt(v, key);
  } else if (key == "batch_size") {
    c.loop.batch_size = GetUnsigned(v, key);
  } else if (key == "features_per_class") {
    c.loop.features_per_class = GetUnsigned(v, key);
  } else if (key == "lr") {
    c.loop.lr = GetDouble(v, key);
  } else if (key == "noise_dim") {
    c.loop.generator.noise_dim = GetUnsigned(v, key);
  } else if (key == "generator_hidden") {
    c.loop.generator.hidden = GetUnsigned(v, key);
  } else if (key == "student_hidden") {
    c.loop.student_hidden = GetSizes(v, key);
  } else if (key == "classifier_epochs") {
    c.loop.classifier_epochs = GetInt(v, key);
  } else if (key == "verify") {
    c.loop.verify = GetBool(v, key);
  } else if (key == "budget") {
    if (v.is_null()) {
      c.budget.reset();
    } else {
      c.budget = GetUnsigned(v, key);
    }
  } else if (key == "transport") {
    const std::string t = GetString(v, key);
    if (t == "in_process" || t == "inprocess") {
      c.transport = TransportKind::kInProcess;
    } else if (t == "tcp") {
      c.transport = TransportKind::kTcp;
    } else {
      throw ConfigError(key, "expected in_process or tcp, got '" + t + "'");
    }
  } else if (key == "host") {
    c.host = GetString(v, key);
  } else if (key == "port") {
    const auto p = GetUnsigned(v, key);
    if (p > 65535) throw ConfigError(key, "must be <= 65535");
    c.port = static_cast<std::uint16_t>(p);
  } else if (key == "data_dir") {
    c.data_dir = GetString(v, key);
  } else if (key == "num_seen") {
    c.synthetic.num_seen = GetInt(v, key);
  } else if (key == "num_unseen") {
    c.synthetic.num_unseen = GetInt(v, key);
  } else if (key == "feature_dim") {
    c.synthetic.feature_dim = GetInt(v, key);
  } else if (key == "semantic_dim") {
    c.synthetic.semantic_dim = GetInt(v, key);
  } else if (key == "samples_per_class") {
    c.synthetic.samples_per_class = GetInt(v, key);
  } else if (key == "noise_std") {
    c.synthetic.noise_std = GetDouble(v, key);
  } else if (key == "semantic_scale") {
    c.synthetic.semantic_scale = GetDouble(v, key);
  } else if (key == "feature_offset") {
    c.synthetic.feature_offset = GetDouble(v, key);
  } else if (key == "teacher_train_fraction") {
    c.synthetic.teacher_train_fraction = GetDouble(v, key);
  } else if (key == "output_dir") {
    c.output_dir = GetString(v, key);
  } else if (key == "seed") {
    c.seed = GetUnsigned(v, key);
    c.PropagateSeed();
  } else if (key == "full_scale") {
    c.full_scale = GetBool(v, key);
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

}  // namespace

std::string TransportName(TransportKind kind) {
  return kind == TransportKind::kTcp ? "tcp" : "in_process";
}

void RunConfig::PropagateSeed() {
  teacher.seed = seed;
  loop.seed = seed;
  synthetic.seed = seed;
}

RunConfig RunConfig::FromJson(const std::string& json) {
  Json j;
  try {
    j = Json::parse(json);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  RunConfig c;
  auto it = j.find("full_scale");
  if (it != j.end() && GetBool(*it, "full_scale")) ApplyFullScale(c);
  for (const auto& [key, value] : j.items()) Apply(c, key, value);
  c.PropagateSeed();
  return c;
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    throw ConfigError("config", e.what());
  }
  return FromJson(text);
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  Json v;
  try {
    v = Json::parse(value);
  } catch (const Json::parse_error&) {
    v = value;  // Bare word: treat as a string.
  }
  if (key == "full_scale" && GetBool(v, key)) ApplyFullScale(*this);
  Apply(*this, key, v);
}

void RunConfig::Validate() const {
  teacher.Validate();
  loop.Validate();
  if (data_dir.empty()) synthetic.Validate();
  regularizer.Validate();
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha", "must be a finite value >= 0");
  }
  if (loop.protocol != protocol) {
    throw ConfigError("protocol", "loop and session protocol disagree");
  }
  if (budget && *budget == 0) throw ConfigError("budget", "must be > 0");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

std::string RunConfig::ToJson() const {
  Json j;
  j["protocol"] = ProtocolName(protocol);
  j["teacher_mode"] = TeacherModeName(teacher_mode);
  j["regularizer"] = RegularizerName(regularizer.tag);
  j["mmd_bandwidths"] = regularizer.bandwidths;
  j["alpha"] = alpha;
  j["dp"] = teacher.dp.enabled;
  j["sigma_n"] = teacher.dp.noise_scale;
  j["grad_clip"] = Number(teacher.dp.grad_clip);
  j["weight_clip"] = Number(teacher.dp.weight_clip);
  j["delta"] = teacher.dp.delta;
  j["teacher_epochs"] = teacher.epochs;
  j["teacher_batch_size"] = teacher.batch_size;
  j["teacher_lr"] = teacher.lr;
  j["teacher_hidden"] = teacher.hidden;
  j["generator_epochs"] = loop.generator_epochs;
  j["student_epochs"] = loop.student_epochs;
  j["batch_size"] = loop.batch_size;
  j["features_per_class"] = loop.features_per_class;
  j["lr"] = loop.lr;
  j["noise_dim"] = loop.generator.noise_dim;
  j["generator_hidden"] = loop.generator.hidden;
  j["student_hidden"] = loop.student_hidden;
  j["classifier_epochs"] = loop.classifier_epochs;
  j["verify"] = loop.verify;
  if (budget) {
    j["budget"] = *budget;
  } else {
    j["budget"] = nullptr;
  }
  j["transport"] = TransportName(transport);
  j["host"] = host;
  j["port"] = port;
  j["data_dir"] = data_dir;
  j["num_seen"] = synthetic.num_seen;
  j["num_unseen"] = synthetic.num_unseen;
  j["feature_dim"] = synthetic.feature_dim;
  j["semantic_dim"] = synthetic.semantic_dim;
  j["samples_per_class"] = synthetic.samples_per_class;
  j["noise_std"] = synthetic.noise_std;
  j["semantic_scale"] = synthetic.semantic_scale;
  j["feature_offset"] = synthetic.feature_offset;
  j["teacher_train_fraction"] = synthetic.teacher_train_fraction;
  j["output_dir"] = output_dir;
  j["seed"] = seed;
  j["full_scale"] = full_scale;
  return j.dump(2);
}

SentinelConfig MakeSentinelConfig(const RunConfig& config) {
  SentinelConfig s;
  s.regularizer = config.regularizer;
  s.alpha = config.alpha;
  s.budget = config.budget;
  return s;
}

}  // namespace sgzsl
