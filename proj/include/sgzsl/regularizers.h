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

#ifndef SGZSL_REGULARIZERS_H_
#define SGZSL_REGULARIZERS_H_

#include <span>
#include <string>
#include <vector>

#include "sgzsl/matrix.h"

namespace sgzsl {

// Distribution-discrepancy penalty between a real and a generated batch.
struct RegularizerKind {
  enum class Tag { kNone, kKlMoments, kMmdGaussian };

  Tag tag = Tag::kKlMoments;
  // MMD kernel bandwidths. Empty means: kDefaultBandwidthMultipliers times the
  // median pairwise distance of the real batch.
  std::vector<double> bandwidths;

  static RegularizerKind None() { return {Tag::kNone, {}}; }
  static RegularizerKind KlMoments() { return {Tag::kKlMoments, {}}; }
  static RegularizerKind Mmd(std::vector<double> bandwidths = {}) {
    return {Tag::kMmdGaussian, std::move(bandwidths)};
  }

  void Validate() const;
  bool operator==(const RegularizerKind&) const = default;
};

inline constexpr double kDefaultBandwidthMultipliers[] = {1.0, 2.0, 4.0, 8.0,
                                                          16.0};
inline constexpr double kVarianceFloor = 1e-6;

std::string RegularizerName(RegularizerKind::Tag tag);
// Accepts "none", "kl", "kl_moments", "mmd", "mmd_gaussian".
RegularizerKind::Tag ParseRegularizerTag(const std::string& name);

struct RegValue {
  double value = 0.0;
  Matrix grad;  // d value / d generated, same shape as generated.
};

// KL(N_gen || N_real) between diagonal Gaussians fitted to each batch
// (population variance plus kVarianceFloor), summed over dimensions.
RegValue KlMoments(const Matrix& real, const Matrix& generated);

// Biased MMD^2 estimate with k(x, y) = sum_b exp(-|x - y|^2 / (2 b^2)).
RegValue MmdGaussian(const Matrix& real, const Matrix& generated,
                     std::span<const double> bandwidths);

// Median pairwise Euclidean distance within `real` (1.0 if degenerate),
// times each default multiplier.
std::vector<double> MedianHeuristicBandwidths(const Matrix& real);

// Dispatches on kind. kNone returns value 0 and a zero gradient.
RegValue EvaluateRegularizer(const RegularizerKind& kind, const Matrix& real,
                             const Matrix& generated);

}  // namespace sgzsl

#endif  // SGZSL_REGULARIZERS_H_
