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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sgzsl/errors.h"
#include "sgzsl/regularizers.h"
#include "sgzsl/rng.h"

namespace sgzsl {
namespace {

Matrix RandomMatrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1) {
  Matrix m(r, c);
  for (double& v : m.data()) v = scale * rng.Normal();
  return m;
}

// Central differences of fn over every entry of `at`.
template <typename Fn>
double WorstRelativeError(const Matrix& analytic, Matrix at, Fn fn,
                          double eps = 1e-6) {
  double worst = 0.0;
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double keep = at.data()[k];
    at.data()[k] = keep + eps;
    const double up = fn(at);
    at.data()[k] = keep - eps;
    const double down = fn(at);
    at.data()[k] = keep;
    const double numeric = (up - down) / (2.0 * eps);
    const double err = std::abs(analytic.data()[k] - numeric) /
                       std::max(std::abs(numeric), 1e-3);
    worst = std::max(worst, err);
  }
  return worst;
}

// Two-pass Gaussian KL(generated || real) per dimension, written out from the
// density formula rather than the library's moment helpers.
double OracleKl(const Matrix& real, const Matrix& gen) {
  double total = 0.0;
  for (std::size_t c = 0; c < real.cols(); ++c) {
    auto moments = [c](const Matrix& m) {
      double mu = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) mu += m(r, c);
      mu /= double(m.rows());
      double var = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) {
        var += (m(r, c) - mu) * (m(r, c) - mu);
      }
      return std::pair{mu, var / double(m.rows()) + 1e-6};
    };
    const auto [mr, vr] = moments(real);
    const auto [mg, vg] = moments(gen);
    total += std::log(std::sqrt(vr) / std::sqrt(vg)) +
             (vg + (mg - mr) * (mg - mr)) / (2.0 * vr) - 0.5;
  }
  return total;
}

double OracleMmd(const Matrix& x, const Matrix& y,
                 const std::vector<double>& bw) {
  auto k = [&](std::span<const double> a, std::span<const double> b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    double s = 0.0;
    for (double h : bw) s += std::exp(-sq / (2.0 * h * h));
    return s;
  };
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j) xx += k(x.row(i), x.row(j));
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) yy += k(y.row(i), y.row(j));
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) xy += k(x.row(i), y.row(j));
  const double n = double(x.rows()), m = double(y.rows());
  return xx / (n * n) + yy / (m * m) - 2.0 * xy / (n * m);
}

TEST(KlMomentsTest, IdenticalBatchesGiveZero) {
  Rng rng(1);
  const Matrix x = RandomMatrix(20, 5, rng);
  const RegValue r = KlMoments(x, x);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  EXPECT_LT(MaxAbs(r.grad), 1e-12);
}

TEST(KlMomentsTest, MeanShiftCostsHalfSquaredShiftPerDim) {
  // Columns of +-1 have mean 0 and population variance exactly 1.
  const Matrix real = Matrix::FromRows({{1, -1, 1}, {-1, 1, -1}});
  const double delta = 0.7;
  Matrix gen = real;
  for (double& v : gen.data()) v += delta;
  const double want = 3.0 * delta * delta / (2.0 * (1.0 + kVarianceFloor));
  EXPECT_NEAR(KlMoments(real, gen).value, want, 1e-12);
}

TEST(KlMomentsTest, MatchesClosedFormOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix real = RandomMatrix(30, 6, rng, 2.0);
    Matrix gen = RandomMatrix(25, 6, rng, 0.5);
    for (double& v : gen.data()) v += 0.3;
    EXPECT_NEAR(KlMoments(real, gen).value, OracleKl(real, gen), 1e-10);
  }
}

TEST(KlMomentsTest, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix real = RandomMatrix(12, 4, rng, 1.5);
    const Matrix gen = RandomMatrix(9, 4, rng);
    const RegValue r = KlMoments(real, gen);
    const double err = WorstRelativeError(
        r.grad, gen, [&](const Matrix& g) { return KlMoments(real, g).value; });
    EXPECT_LT(err, 1e-4) << "trial " << trial;
  }
}

TEST(KlMomentsTest, DegenerateInputsThrow) {
  EXPECT_THROW(KlMoments(Matrix(1, 3), Matrix(4, 3)), DegenerateBatchError);
  EXPECT_THROW(KlMoments(Matrix(4, 3), Matrix(4, 2)), DimensionError);
}

TEST(KlMomentsTest, ConstantColumnStaysFinite) {
  const Matrix real(5, 2, 1.0);
  const Matrix gen(5, 2, 3.0);
  const RegValue r = KlMoments(real, gen);
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_TRUE(AllFinite(r.grad));
}

TEST(MmdTest, IdenticalBatchesGiveZero) {
  Rng rng(4);
  const Matrix x = RandomMatrix(10, 3, rng);
  const double bw[] = {1.0, 2.0};
  const RegValue r = MmdGaussian(x, x, bw);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  EXPECT_LT(MaxAbs(r.grad), 1e-12);
}

TEST(MmdTest, SeparatedClustersAreFarApart) {
  Rng rng(5);
  Matrix x = RandomMatrix(10, 2, rng, 0.1);
  Matrix y = RandomMatrix(10, 2, rng, 0.1);
  for (double& v : x.data()) v += 10.0;
  for (double& v : y.data()) v -= 10.0;
  const double bw[] = {1.0};
  EXPECT_GT(MmdGaussian(x, y, bw).value, 0.5);
}

TEST(MmdTest, MatchesDoubleSumOracle) {
  Rng rng(6);
  const std::vector<double> bw = {0.5, 1.0, 4.0};
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = RandomMatrix(8, 3, rng);
    const Matrix y = RandomMatrix(6, 3, rng, 1.5);
    EXPECT_NEAR(MmdGaussian(x, y, bw).value, OracleMmd(x, y, bw), 1e-12);
  }
}

TEST(MmdTest, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix real = RandomMatrix(7, 3, rng);
    const Matrix gen = RandomMatrix(6, 3, rng, 1.2);
    const auto bw = MedianHeuristicBandwidths(real);
    const RegValue r = MmdGaussian(real, gen, bw);
    const double err = WorstRelativeError(r.grad, gen, [&](const Matrix& g) {
      return MmdGaussian(real, g, bw).value;
    });
    EXPECT_LT(err, 1e-4) << "trial " << trial;
  }
}

TEST(MmdTest, DegenerateAndBadBandwidthsThrow) {
  const double bw[] = {1.0};
  EXPECT_THROW(MmdGaussian(Matrix(1, 2), Matrix(3, 2), bw),
               DegenerateBatchError);
  const double bad[] = {0.0};
  EXPECT_THROW(MmdGaussian(Matrix(3, 2), Matrix(3, 2), bad), ConfigError);
  EXPECT_THROW(MmdGaussian(Matrix(3, 2), Matrix(3, 2), {}), ConfigError);
}

TEST(MedianHeuristicTest, ScalesMultipliersByMedianDistance) {
  // Pairwise distances on a line: 1, 3, 2 with median 2.
  const Matrix x = Matrix::FromRows({{0.0}, {1.0}, {3.0}});
  const auto bw = MedianHeuristicBandwidths(x);
  EXPECT_EQ(bw, (std::vector<double>{2.0, 4.0, 8.0, 16.0, 32.0}));
}

TEST(EvaluateRegularizerTest, NoneIsZero) {
  Rng rng(8);
  const Matrix x = RandomMatrix(4, 3, rng);
  const Matrix y = RandomMatrix(4, 3, rng);
  const RegValue r = EvaluateRegularizer(RegularizerKind::None(), x, y);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(MaxAbs(r.grad), 0.0);
}

TEST(EvaluateRegularizerTest, ParseNames) {
  EXPECT_EQ(ParseRegularizerTag("kl"), RegularizerKind::Tag::kKlMoments);
  EXPECT_EQ(ParseRegularizerTag("mmd_gaussian"),
            RegularizerKind::Tag::kMmdGaussian);
  EXPECT_THROW(ParseRegularizerTag("l2"), ConfigError);
}

}  // namespace
}  // namespace sgzsl
