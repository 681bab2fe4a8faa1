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

#include "sgzsl/regularizers.h"

#include <algorithm>
#include <cmath>

#include "sgzsl/errors.h"

namespace sgzsl {
namespace {

void CheckPair(const Matrix& real, const Matrix& generated, const char* name) {
  if (real.cols() != generated.cols()) {
    throw DimensionError(std::string(name) + ": real has " +
                         std::to_string(real.cols()) +
                         " dims, generated has " +
                         std::to_string(generated.cols()));
  }
  if (real.rows() < 2 || generated.rows() < 2) {
    throw DegenerateBatchError(std::string(name) +
                               ": need at least 2 rows in each batch");
  }
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> var;  // Floored.
};

Moments DiagonalMoments(const Matrix& m) {
  const std::size_t d = m.cols();
  const auto n = static_cast<double>(m.rows());
  Moments out{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) out.mean[c] += m(r, c);
  }
  for (double& v : out.mean) v /= n;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = m(r, c) - out.mean[c];
      out.var[c] += diff * diff;
    }
  }
  for (double& v : out.var) v = v / n + kVarianceFloor;
  return out;
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

void RegularizerKind::Validate() const {
  if (tag != Tag::kMmdGaussian) return;
  for (double b : bandwidths) {
    if (!(b > 0.0)) {
      throw ConfigError("mmd_bandwidths", "every bandwidth must be > 0");
    }
  }
}

std::string RegularizerName(RegularizerKind::Tag tag) {
  switch (tag) {
    case RegularizerKind::Tag::kNone:
      return "none";
    case RegularizerKind::Tag::kKlMoments:
      return "kl";
    case RegularizerKind::Tag::kMmdGaussian:
      return "mmd";
  }
  return "none";
}

RegularizerKind::Tag ParseRegularizerTag(const std::string& name) {
  if (name == "none") return RegularizerKind::Tag::kNone;
  if (name == "kl" || name == "kl_moments") {
    return RegularizerKind::Tag::kKlMoments;
  }
  if (name == "mmd" || name == "mmd_gaussian") {
    return RegularizerKind::Tag::kMmdGaussian;
  }
  throw ConfigError("regularizer", "unknown regularizer '" + name + "'");
}

RegValue KlMoments(const Matrix& real, const Matrix& generated) {
  CheckPair(real, generated, "KlMoments");
  const Moments r = DiagonalMoments(real);
  const Moments g = DiagonalMoments(generated);
  const std::size_t d = real.cols();
  const auto n = static_cast<double>(generated.rows());

  RegValue out{0.0, Matrix(generated.rows(), d)};
  std::vector<double> d_mean(d), d_var(d);
  for (std::size_t c = 0; c < d; ++c) {
    const double dm = g.mean[c] - r.mean[c];
    out.value += 0.5 * std::log(r.var[c] / g.var[c]) +
                 (g.var[c] + dm * dm) / (2.0 * r.var[c]) - 0.5;
    d_mean[c] = dm / r.var[c];
    d_var[c] = 0.5 / r.var[c] - 0.5 / g.var[c];
  }
  // mean_c = sum_i x_ic / n, var_c = sum_i (x_ic - mean_c)^2 / n + floor.
  for (std::size_t i = 0; i < generated.rows(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      out.grad(i, c) = d_mean[c] / n +
                       d_var[c] * 2.0 * (generated(i, c) - g.mean[c]) / n;
    }
  }
  return out;
}

RegValue MmdGaussian(const Matrix& real, const Matrix& generated,
                     std::span<const double> bandwidths) {
  CheckPair(real, generated, "MmdGaussian");
  if (bandwidths.empty()) {
    throw ConfigError("mmd_bandwidths", "at least one bandwidth required");
  }
  for (double b : bandwidths) {
    if (!(b > 0.0)) throw ConfigError("mmd_bandwidths", "must be > 0");
  }
  std::vector<double> inv_two_h2, inv_h2;
  for (double b : bandwidths) {
    inv_two_h2.push_back(1.0 / (2.0 * b * b));
    inv_h2.push_back(1.0 / (b * b));
  }
  // Kernel value and d k / d(|x-y|^2) factor for a squared distance.
  auto kernel = [&](double sq, double* slope) {
    double k = 0.0;
    double s = 0.0;
    for (std::size_t b = 0; b < inv_two_h2.size(); ++b) {
      const double e = std::exp(-sq * inv_two_h2[b]);
      k += e;
      s += e * inv_h2[b];
    }
    if (slope != nullptr) *slope = s;
    return k;
  };

  const std::size_t n = real.rows();
  const std::size_t m = generated.rows();
  const std::size_t d = real.cols();
  const auto nn = static_cast<double>(n);
  const auto mm = static_cast<double>(m);

  double kxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      kxx += kernel(SquaredDistance(real.row(i), real.row(j)), nullptr);
    }
  }
  RegValue out{0.0, Matrix(m, d)};
  double kyy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto yi = generated.row(i);
    auto gi = out.grad.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      auto yj = generated.row(j);
      double slope = 0.0;
      kyy += kernel(SquaredDistance(yi, yj), &slope);
      // d/dy_i of sum_{a,b} k(y_a, y_b) / m^2: the pair appears twice.
      for (std::size_t c = 0; c < d; ++c) {
        gi[c] += 2.0 * slope * (yj[c] - yi[c]) / (mm * mm);
      }
    }
  }
  double kxy = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    auto yj = generated.row(j);
    auto gj = out.grad.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      auto xi = real.row(i);
      double slope = 0.0;
      kxy += kernel(SquaredDistance(xi, yj), &slope);
      for (std::size_t c = 0; c < d; ++c) {
        gj[c] -= 2.0 * slope * (xi[c] - yj[c]) / (nn * mm);
      }
    }
  }
  out.value = kxx / (nn * nn) + kyy / (mm * mm) - 2.0 * kxy / (nn * mm);
  return out;
}

std::vector<double> MedianHeuristicBandwidths(const Matrix& real) {
  std::vector<double> dists;
  for (std::size_t i = 0; i < real.rows(); ++i) {
    for (std::size_t j = i + 1; j < real.rows(); ++j) {
      dists.push_back(std::sqrt(SquaredDistance(real.row(i), real.row(j))));
    }
  }
  double scale = 1.0;
  if (!dists.empty()) {
    auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    if (*mid > 0.0) scale = *mid;
  }
  std::vector<double> out;
  for (double mult : kDefaultBandwidthMultipliers) out.push_back(mult * scale);
  return out;
}

RegValue EvaluateRegularizer(const RegularizerKind& kind, const Matrix& real,
                             const Matrix& generated) {
  switch (kind.tag) {
    case RegularizerKind::Tag::kNone:
      return {0.0, Matrix(generated.rows(), generated.cols())};
    case RegularizerKind::Tag::kKlMoments:
      return KlMoments(real, generated);
    case RegularizerKind::Tag::kMmdGaussian: {
      if (kind.bandwidths.empty()) {
        const auto bw = MedianHeuristicBandwidths(real);
        return MmdGaussian(real, generated, bw);
      }
      return MmdGaussian(real, generated, kind.bandwidths);
    }
  }
  return {0.0, Matrix(generated.rows(), generated.cols())};
}

}  // namespace sgzsl
