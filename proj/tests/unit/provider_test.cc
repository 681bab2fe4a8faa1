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

#include <vector>

#include <gtest/gtest.h>

#include "sgzsl/errors.h"
#include "sgzsl/protocol.h"
#include "sgzsl/provider.h"
#include "sgzsl/session.h"

namespace sgzsl {
namespace {

TaskInfo SmallTask() {
  TaskInfo task;
  task.semantics = Matrix::FromRows({{1, 0}, {0, 1}, {1, 1}, {-1, 0.5}});
  task.seen_classes = {0, 1, 2};
  task.unseen_classes = {3};
  return task;
}

GeneratorNet SmallGenerator(std::uint64_t seed) {
  Rng rng(seed);
  GeneratorConfig cfg;
  cfg.noise_dim = 3;
  cfg.hidden = 8;
  return GeneratorNet::Create(cfg, 2, 5, rng);
}

TrainLoopConfig SmallLoop(ProtocolKind kind) {
  TrainLoopConfig cfg;
  cfg.protocol = kind;
  cfg.generator_epochs = 2;
  cfg.student_epochs = 2;
  cfg.batch_size = 4;
  cfg.features_per_class = 6;
  cfg.generator.noise_dim = 3;
  cfg.generator.hidden = 8;
  cfg.student_hidden = {6};
  cfg.classifier_epochs = 3;
  return cfg;
}

HelloPayload Ack(ProtocolKind kind) {
  HelloPayload ack;
  ack.protocol = kind;
  ack.feature_dim = 5;
  ack.num_classes = 4;
  ack.classes = {0, 1, 2, 3};
  return ack;
}

// Stands in for the sentinel: the "teacher" always votes for class 0.
class FakeSentinel : public FeedbackSource {
 public:
  explicit FakeSentinel(ProtocolKind kind) : kind_(kind) {}

  FeedbackMessage Request(const Matrix& generated,
                          std::span<const int> labels) override {
    ++requests;
    if (budget && requests > *budget) throw BudgetExceeded("fake budget");
    seen_owner_rows |= generated.origin() == Origin::kOwnerData;
    FeedbackMessage fb;
    fb.kind = kind_;
    fb.softmax = Matrix(labels.size(), 4, 0.1);
    for (std::size_t r = 0; r < labels.size(); ++r) fb.softmax(r, 0) = 0.7;
    fb.gradient = Matrix(generated.rows(), generated.cols(), 0.01);
    if (tag_reply) fb.softmax.set_origin(Origin::kOwnerData);
    return fb;
  }

  std::optional<std::uint64_t> budget;
  bool tag_reply = false;
  bool seen_owner_rows = false;
  std::uint64_t requests = 0;

 private:
  ProtocolKind kind_;
};

TEST(SynthesizeTest, DeterministicClassMajorAndNonNegative) {
  const GeneratorNet gen = SmallGenerator(1);
  const TaskInfo task = SmallTask();
  const int classes[] = {2, 0};
  Rng a(5), b(5);
  const GeneratedBatch x = Synthesize(gen, task.semantics, classes, 3, a);
  const GeneratedBatch y = Synthesize(gen, task.semantics, classes, 3, b);
  EXPECT_EQ(x.features, y.features);
  EXPECT_EQ(x.labels, (std::vector<int>{2, 2, 2, 0, 0, 0}));
  EXPECT_EQ(x.features.cols(), 5u);
  for (double v : x.features.values()) EXPECT_GE(v, 0.0);
  EXPECT_EQ(x.features.origin(), Origin::kUntagged);
}

TEST(SynthesizeTest, EmptyAndUnknownClasses) {
  const GeneratorNet gen = SmallGenerator(2);
  const TaskInfo task = SmallTask();
  Rng rng(6);
  const GeneratedBatch empty = Synthesize(gen, task.semantics, {}, 3, rng);
  EXPECT_EQ(empty.features.rows(), 0u);
  EXPECT_TRUE(empty.labels.empty());
  const int bad[] = {9};
  EXPECT_THROW(Synthesize(gen, task.semantics, bad, 3, rng), DataError);
}

TEST(VerifyLabelsTest, DropsRowsWhoseArgmaxDisagrees) {
  const Matrix features = Matrix::FromRows({{0}, {1}, {2}, {3}});
  const int labels[] = {0, 1, 1, 2};
  const Matrix softmax = Matrix::FromRows(
      {{0.8, 0.1, 0.1}, {0.6, 0.3, 0.1}, {0.2, 0.7, 0.1}, {0.5, 0.2, 0.3}});
  const VerifiedBatch vb = VerifyLabels(features, labels, softmax);
  EXPECT_EQ(vb.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(vb.features, Matrix::FromRows({{0}, {2}}));
  EXPECT_EQ(vb.teacher_softmax,
            Matrix::FromRows({{0.8, 0.1, 0.1}, {0.2, 0.7, 0.1}}));
  for (std::size_t r = 0; r < vb.size(); ++r) {
    EXPECT_EQ(int(RowArgmax(vb.teacher_softmax)[r]), vb.labels[r]);
  }
}

TEST(VerifyLabelsTest, ShapeMismatchThrows) {
  const int labels[] = {0};
  EXPECT_THROW(VerifyLabels(Matrix(2, 1), labels, Matrix(2, 3)),
               DimensionError);
}

TEST(PredictRestrictedTest, RestrictsAndBreaksTiesTowardSmallestId) {
  const Matrix probs = Matrix::FromRows({{0.4, 0.4, 0.2}, {0.5, 0.1, 0.4}});
  const int columns[] = {7, 3, 5};
  const int all[] = {3, 5, 7};
  EXPECT_EQ(PredictRestricted(probs, columns, all), (std::vector<int>{3, 7}));
  const int unseen[] = {5, 3};
  EXPECT_EQ(PredictRestricted(probs, columns, unseen),
            (std::vector<int>{3, 5}));
  EXPECT_THROW(PredictRestricted(probs, columns, {}), DataError);
  const int missing[] = {4};
  EXPECT_THROW(PredictRestricted(probs, columns, missing), DimensionError);
}

TEST(ClassifierTest, SingleTargetClassAlwaysPredictsIt) {
  const GeneratorNet gen = SmallGenerator(3);
  const TaskInfo task = SmallTask();
  const int target[] = {3};
  double acc = 0.0;
  const Classifier c = TrainUnseenClassifier(
      gen, task.semantics, target, SmallLoop(ProtocolKind::kWhitebox), &acc);
  EXPECT_EQ(c.output_classes, std::vector<int>{3});
  EXPECT_EQ(acc, 100.0);
  Rng rng(7);
  Matrix x(4, 5);
  for (double& v : x.data()) v = rng.Normal();
  EXPECT_EQ(Predict(c, x, target), (std::vector<int>{3, 3, 3, 3}));
  EXPECT_THROW(TrainUnseenClassifier(gen, task.semantics, {},
                                     SmallLoop(ProtocolKind::kWhitebox)),
               DataError);
}

TEST(TrainStudentTest, MatchedTargetsLeaveStudentAtOptimum) {
  Rng rng(8);
  const std::size_t dims[] = {3, 4};
  const Activation acts[] = {Activation::Identity()};
  MlpModel student = MlpModel::Create(dims, acts, rng);
  VerifiedBatch vb;
  vb.features = Matrix::FromRows({{1, 0, 2}, {0, 1, -1}, {2, 2, 0}});
  vb.labels = {0, 1, 2};
  vb.teacher_softmax = Softmax(Predict(student, vb.features));
  const MlpModel before = student;
  const auto log = TrainStudent(student, vb, SmallLoop(ProtocolKind::kBlackbox),
                                rng);
  ASSERT_FALSE(log.empty());
  EXPECT_NEAR(log.front().loss, 0.0, 1e-30);
  EXPECT_EQ(student, before);
  VerifiedBatch none;
  EXPECT_THROW(TrainStudent(student, none, SmallLoop(ProtocolKind::kBlackbox),
                            rng),
               DataError);
}

TEST(TrainProviderTest, VerificationKeepsOnlyTeacherAgreement) {
  for (ProtocolKind kind : {ProtocolKind::kWhitebox, ProtocolKind::kBlackbox}) {
    FakeSentinel fake(kind);
    const std::uint64_t checks_before = ProvenanceChecks();
    const ProviderResult r =
        TrainProvider(fake, Ack(kind), SmallTask(), SmallLoop(kind));
    // Only class 0 survives; it fills its quota of 6 rows.
    EXPECT_EQ(r.verified_rows, 6u);
    EXPECT_EQ(r.generator_log.size(), 2u);
    EXPECT_NEAR(r.generator_log.back().verified_fraction, 0.25, 1e-12);
    EXPECT_FALSE(fake.seen_owner_rows);
    EXPECT_GT(ProvenanceChecks(), checks_before);
    EXPECT_EQ(r.student.output_dim(), 4u);
  }
}

TEST(TrainProviderTest, WithoutVerificationEveryRowIsKept) {
  FakeSentinel fake(ProtocolKind::kBlackbox);
  TrainLoopConfig cfg = SmallLoop(ProtocolKind::kBlackbox);
  cfg.verify = false;
  const ProviderResult r =
      TrainProvider(fake, Ack(ProtocolKind::kBlackbox), SmallTask(), cfg);
  // Two batches of 4 per class, each class capped at its quota of 6.
  EXPECT_EQ(r.generated_rows, 4u * 8u);
  EXPECT_EQ(r.verified_rows, 4u * 6u);
}

TEST(TrainProviderTest, BudgetExhaustionLeavesPartialResult) {
  FakeSentinel fake(ProtocolKind::kWhitebox);
  fake.budget = 3;
  ProviderResult partial;
  EXPECT_THROW(TrainProvider(fake, Ack(ProtocolKind::kWhitebox), SmallTask(),
                             SmallLoop(ProtocolKind::kWhitebox), &partial),
               BudgetExceeded);
  EXPECT_TRUE(partial.budget_exhausted);
  EXPECT_EQ(partial.generator.feature_dim, 5u);
}

TEST(TrainProviderTest, OwnerTaggedFeedbackIsRefused) {
  FakeSentinel fake(ProtocolKind::kWhitebox);
  fake.tag_reply = true;
  EXPECT_THROW(TrainProvider(fake, Ack(ProtocolKind::kWhitebox), SmallTask(),
                             SmallLoop(ProtocolKind::kWhitebox)),
               ProtocolError);
  TaskInfo tagged = SmallTask();
  tagged.semantics.set_origin(Origin::kOwnerData);
  FakeSentinel clean(ProtocolKind::kWhitebox);
  EXPECT_THROW(TrainProvider(clean, Ack(ProtocolKind::kWhitebox), tagged,
                             SmallLoop(ProtocolKind::kWhitebox)),
               ProtocolError);
}

TEST(TrainProviderTest, AckMismatchRejected) {
  FakeSentinel fake(ProtocolKind::kWhitebox);
  HelloPayload ack = Ack(ProtocolKind::kBlackbox);
  EXPECT_THROW(TrainProvider(fake, ack, SmallTask(),
                             SmallLoop(ProtocolKind::kWhitebox)),
               ProtocolError);
  ack = Ack(ProtocolKind::kWhitebox);
  ack.num_classes = 5;
  EXPECT_THROW(TrainProvider(fake, ack, SmallTask(),
                             SmallLoop(ProtocolKind::kWhitebox)),
               DimensionError);
}

}  // namespace
}  // namespace sgzsl
