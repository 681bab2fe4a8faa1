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

#ifndef SGZSL_DP_H_
#define SGZSL_DP_H_

#include <cstdint>
#include <limits>
#include <span>

#include "sgzsl/mlp.h"
#include "sgzsl/rng.h"

namespace sgzsl {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// DP-SGD settings for teacher training.
struct DpConfig {
  bool enabled = false;
  double noise_scale = 1.0;   // sigma_n
  double grad_clip = 1.0;     // c_g, per-sample L2 bound
  double weight_clip = 1.0;   // c, weights truncated to [-c, c]
  double delta = 1e-5;
  // Accounting inputs; PretrainTeacher fills them from the data loader.
  double sample_rate = 1.0;
  std::uint64_t steps = 0;

  void Validate() const;
};

// Clips each per-sample gradient to L2 norm <= grad_clip, averages, and adds
// N(0, (noise_scale * grad_clip / batch)^2) to every coordinate. No noise is
// drawn when noise_scale is 0.
GradBundle DpSgdStep(std::span<const GradBundle> per_sample,
                     const DpConfig& dp, Rng& rng);

// Truncates every weight and bias into [-c, c]. No-op for c = infinity.
void ClipWeights(MlpModel& model, double c);

// Epsilon estimate for `steps` applications of the subsampled Gaussian
// mechanism:
//   delta_step = delta / steps
//   eps_step   = sqrt(2 ln(1.25 / delta_step)) / noise_scale
//   eps_amp    = ln(1 + q (exp(eps_step) - 1))          (q = sample_rate)
//   epsilon    = steps * eps_amp
// This is basic composition of the classical Gaussian-mechanism bound. It is
// an upper-bound style estimate and is looser than moments/RDP accountants.
// Returns +inf when noise_scale is 0 and 0 when steps is 0.
double PrivacyReport(const DpConfig& dp);

}  // namespace sgzsl

#endif  // SGZSL_DP_H_
