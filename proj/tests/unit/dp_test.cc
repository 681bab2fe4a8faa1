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
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "sgzsl/dataset.h"
#include "sgzsl/dp.h"
#include "sgzsl/errors.h"
#include "sgzsl/sentinel.h"

namespace sgzsl {
namespace {

GradBundle RandomGrads(const MlpModel& model, Rng& rng, double scale) {
  GradBundle g = GradBundle::ZerosLike(model);
  g.ForEach([&](double& v) { v = scale * rng.Normal(); });
  return g;
}

MlpModel SmallNet() {
  Rng rng(1);
  const std::size_t dims[] = {3, 4, 2};
  const Activation acts[] = {Activation::LeakyRelu(), Activation::Identity()};
  return MlpModel::Create(dims, acts, rng);
}

DpConfig Degenerate() {
  DpConfig dp;
  dp.enabled = true;
  dp.noise_scale = 0.0;
  dp.grad_clip = kInfinity;
  dp.weight_clip = kInfinity;
  return dp;
}

TEST(DpSgdStepTest, DegenerateSettingsEqualPlainMean) {
  const MlpModel model = SmallNet();
  Rng rng(2);
  std::vector<GradBundle> per_sample;
  for (int i = 0; i < 7; ++i) per_sample.push_back(RandomGrads(model, rng, 5.0));
  GradBundle mean = GradBundle::ZerosLike(model);
  for (const auto& g : per_sample) mean.AddInPlace(g);
  mean.DivideInPlace(7.0);
  Rng noise(3);
  EXPECT_EQ(DpSgdStep(per_sample, Degenerate(), noise), mean);
}

TEST(DpSgdStepTest, ClippedMeanStaysWithinBound) {
  const MlpModel model = SmallNet();
  Rng rng(4);
  std::vector<GradBundle> per_sample;
  for (int i = 0; i < 5; ++i) per_sample.push_back(RandomGrads(model, rng, 10.0));
  DpConfig dp = Degenerate();
  dp.grad_clip = 0.5;
  Rng noise(5);
  const GradBundle g = DpSgdStep(per_sample, dp, noise);
  EXPECT_LE(g.Norm(), 0.5 + 1e-12);
  // A single sample lands exactly on the bound.
  const GradBundle one = DpSgdStep({&per_sample[0], 1}, dp, noise);
  EXPECT_NEAR(one.Norm(), 0.5, 1e-12);
}

TEST(DpSgdStepTest, NoiseHasExpectedScale) {
  const MlpModel model = SmallNet();
  DpConfig dp = Degenerate();
  dp.grad_clip = 2.0;
  dp.noise_scale = 1.5;
  std::vector<GradBundle> zeros(4, GradBundle::ZerosLike(model));
  Rng noise(6);
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const GradBundle g = DpSgdStep(zeros, dp, noise);
    std::as_const(g).ForEach([&](double v) {
      sum_sq += v * v;
      ++count;
    });
  }
  const double want = 1.5 * 2.0 / 4.0;
  EXPECT_NEAR(std::sqrt(sum_sq / double(count)), want, 0.02);
}

TEST(DpSgdStepTest, RejectsDisabledAndEmpty) {
  Rng noise(7);
  DpConfig off;
  const MlpModel model = SmallNet();
  const GradBundle g = GradBundle::ZerosLike(model);
  EXPECT_THROW(DpSgdStep({&g, 1}, off, noise), ConfigError);
  EXPECT_THROW(DpSgdStep({}, Degenerate(), noise), DimensionError);
}

TEST(ClipWeightsTest, TruncatesWeightsAndBiases) {
  MlpModel model = SmallNet();
  for (auto& layer : model.mutable_layers()) {
    for (double& w : layer.weight.data()) w *= 100.0;
    for (double& b : layer.bias) b = -50.0;
  }
  ClipWeights(model, 0.25);
  for (const auto& layer : model.layers()) {
    EXPECT_LE(MaxAbs(layer.weight), 0.25);
    for (double b : layer.bias) EXPECT_EQ(b, -0.25);
  }
  const MlpModel before = model;
  ClipWeights(model, kInfinity);
  EXPECT_EQ(model, before);
}

TEST(PretrainTeacherTest, DegenerateDpIsBitIdenticalToPlainTraining) {
  SyntheticSpec spec;
  spec.num_seen = 4;
  spec.num_unseen = 2;
  spec.feature_dim = 8;
  spec.semantic_dim = 4;
  spec.samples_per_class = 30;
  const ZslDataset ds = GenerateSynthetic(spec);
  TeacherTrainConfig plain;
  plain.hidden = {16, 8};
  plain.epochs = 4;
  plain.batch_size = 16;
  plain.seed = 11;
  TeacherTrainConfig priv = plain;
  priv.dp = Degenerate();
  const TrainedTeacher a = PretrainTeacher(ds, TeacherMode::kOmniscient, plain);
  const TrainedTeacher b = PretrainTeacher(ds, TeacherMode::kOmniscient, priv);
  ASSERT_EQ(a.model.layers().size(), b.model.layers().size());
  for (std::size_t l = 0; l < a.model.layers().size(); ++l) {
    EXPECT_EQ(a.model.layers()[l].weight.values(),
              b.model.layers()[l].weight.values());
    EXPECT_EQ(a.model.layers()[l].bias, b.model.layers()[l].bias);
  }
  EXPECT_FALSE(a.epsilon.has_value());
  EXPECT_TRUE(std::isinf(*b.epsilon));
}

// Values computed offline from the per-step Gaussian mechanism bound with
// delta split evenly across steps, amplified by Poisson subsampling as
// ln(1 - q + q exp(eps_step)) and composed linearly.
struct PrivacyCase {
  double sigma, delta, q;
  std::uint64_t steps;
  double want;
};

TEST(PrivacyReportTest, MatchesAnalyticComposition) {
  const PrivacyCase cases[] = {
      {1.0, 1e-5, 0.1, 100, 344.34543814766556},
      {0.5, 1e-5, 64.0 / 780.0, 650, 6220.797768521991},
      {2.0, 1e-6, 1.0, 10, 28.584295690354633},
      {4.0, 1e-5, 0.01, 1000, 35.39086150835167},
  };
  for (const auto& c : cases) {
    DpConfig dp;
    dp.enabled = true;
    dp.noise_scale = c.sigma;
    dp.delta = c.delta;
    dp.sample_rate = c.q;
    dp.steps = c.steps;
    EXPECT_NEAR(PrivacyReport(dp), c.want, 1e-9 * std::max(1.0, c.want))
        << "sigma " << c.sigma;
  }
}

TEST(PrivacyReportTest, EdgeCases) {
  DpConfig dp;
  dp.enabled = true;
  dp.steps = 100;
  dp.sample_rate = 0.01;
  dp.noise_scale = 0.0;
  EXPECT_TRUE(std::isinf(PrivacyReport(dp)));
  dp.noise_scale = 100.0;
  EXPECT_LT(PrivacyReport(dp), 0.1);
  dp.steps = 0;
  EXPECT_EQ(PrivacyReport(dp), 0.0);
  EXPECT_THROW(PrivacyReport(DpConfig{}), ConfigError);
}

TEST(PrivacyReportTest, MoreNoiseNeverCostsMore) {
  DpConfig dp;
  dp.enabled = true;
  dp.steps = 500;
  dp.sample_rate = 0.05;
  double last = kInfinity;
  for (double sigma : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    dp.noise_scale = sigma;
    const double eps = PrivacyReport(dp);
    EXPECT_LT(eps, last);
    last = eps;
  }
}

TEST(DpConfigTest, ValidationNamesField) {
  DpConfig dp;
  dp.enabled = true;
  dp.delta = 1.5;
  try {
    dp.Validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("delta"), std::string::npos);
  }
}

}  // namespace
}  // namespace sgzsl
