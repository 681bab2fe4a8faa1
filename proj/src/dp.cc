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

#include "sgzsl/dp.h"

#include <algorithm>
#include <cmath>

#include "sgzsl/errors.h"

namespace sgzsl {

void DpConfig::Validate() const {
  if (!enabled) return;
  if (!(noise_scale >= 0.0)) {
    throw ConfigError("dp_noise_scale", "must be >= 0");
  }
  if (!(grad_clip > 0.0)) throw ConfigError("dp_grad_clip", "must be > 0");
  if (!(weight_clip > 0.0)) throw ConfigError("dp_weight_clip", "must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("dp_delta", "must be in (0, 1)");
  }
  if (!(sample_rate > 0.0 && sample_rate <= 1.0)) {
    throw ConfigError("dp_sample_rate", "must be in (0, 1]");
  }
  if (noise_scale > 0.0 && std::isinf(grad_clip)) {
    throw ConfigError("dp_grad_clip",
                      "must be finite when noise_scale is positive");
  }
}

GradBundle DpSgdStep(std::span<const GradBundle> per_sample,
                     const DpConfig& dp, Rng& rng) {
  if (!dp.enabled) throw ConfigError("dp_enabled", "DpSgdStep requires DP");
  dp.Validate();
  if (per_sample.empty()) throw DimensionError("DpSgdStep: empty batch");
  GradBundle total;
  for (const auto& l : per_sample.front().layers) {
    total.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()),
                            std::vector<double>(l.bias.size(), 0.0)});
  }
  for (const GradBundle& g : per_sample) {
    const double norm = g.Norm();
    if (norm > dp.grad_clip) {
      GradBundle clipped = g;
      clipped.ScaleInPlace(dp.grad_clip / norm);
      total.AddInPlace(clipped);
    } else {
      total.AddInPlace(g);
    }
  }
  const auto batch = static_cast<double>(per_sample.size());
  total.DivideInPlace(batch);
  if (dp.noise_scale > 0.0) {
    const double stddev = dp.noise_scale * dp.grad_clip / batch;
    total.ForEach([&](double& v) { v += stddev * rng.Normal(); });
  }
  return total;
}

void ClipWeights(MlpModel& model, double c) {
  if (std::isinf(c)) return;
  for (auto& layer : model.mutable_layers()) {
    for (double& w : layer.weight.data()) w = std::clamp(w, -c, c);
    for (double& b : layer.bias) b = std::clamp(b, -c, c);
  }
}

double PrivacyReport(const DpConfig& dp) {
  if (!dp.enabled) throw ConfigError("dp_enabled", "no DP settings to report");
  dp.Validate();
  if (dp.steps == 0) return 0.0;
  if (dp.noise_scale == 0.0) return kInfinity;
  const auto steps = static_cast<double>(dp.steps);
  const double delta_step = dp.delta / steps;
  const double eps_step =
      std::sqrt(2.0 * std::log(1.25 / delta_step)) / dp.noise_scale;
  // ln(1 - q + q e^eps) = eps + ln(q + (1 - q) e^-eps), stable for large eps.
  const double q = dp.sample_rate;
  const double amplified = eps_step + std::log(q + (1.0 - q) * std::exp(-eps_step));
  return steps * amplified;
}

}  // namespace sgzsl
