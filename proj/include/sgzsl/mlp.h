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

#ifndef SGZSL_MLP_H_
#define SGZSL_MLP_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgzsl/matrix.h"
#include "sgzsl/rng.h"

namespace sgzsl {

enum class ActivationKind { kIdentity, kRelu, kLeakyRelu };

struct Activation {
  ActivationKind kind = ActivationKind::kIdentity;
  double slope = 0.0;  // Negative-side slope, LeakyReLU only.

  static Activation Identity() { return {ActivationKind::kIdentity, 0.0}; }
  static Activation Relu() { return {ActivationKind::kRelu, 0.0}; }
  static Activation LeakyRelu(double slope = 0.01) {
    return {ActivationKind::kLeakyRelu, slope};
  }

  bool operator==(const Activation&) const = default;
};

std::string ActivationName(ActivationKind kind);
ActivationKind ParseActivationKind(const std::string& name);

// Fully connected layer computing act(x * weight + bias).
// weight is (fan_in x fan_out).
struct DenseLayer {
  Matrix weight;
  std::vector<double> bias;
  Activation activation;
};

class MlpModel {
 public:
  MlpModel() = default;
  // Takes ownership of prebuilt layers; validates chaining.
  explicit MlpModel(std::vector<DenseLayer> layers);

  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static MlpModel Create(std::span<const std::size_t> layer_dims,
                         std::span<const Activation> activations, Rng& rng);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_parameters() const;
  std::vector<std::size_t> layer_dims() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  bool operator==(const MlpModel& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

// Tags every weight matrix, e.g. to mark a model as owner-side.
void SetModelOrigin(MlpModel& model, Origin origin);
bool AnyWeightHasOrigin(const MlpModel& model, Origin origin);

struct LayerGrad {
  Matrix weight;
  std::vector<double> bias;
};

// Parameter gradients, shape-congruent with an MlpModel.
struct GradBundle {
  std::vector<LayerGrad> layers;

  static GradBundle ZerosLike(const MlpModel& model);

  void AddInPlace(const GradBundle& other);
  void ScaleInPlace(double factor);
  // Divides every entry by n.
  void DivideInPlace(double n);
  double SquaredNorm() const;
  double Norm() const;
  // Visits every scalar in a fixed order: per layer, weights then biases.
  void ForEach(const std::function<void(double&)>& fn);
  void ForEach(const std::function<void(double)>& fn) const;
  bool operator==(const GradBundle&) const;
};

struct BackwardResult {
  GradBundle grads;
  Matrix input_grad;
};

// Returns activations[0] = batch and activations[i] = output of layer i.
std::vector<Matrix> Forward(const MlpModel& model, const Matrix& batch);

// Output of the last layer only.
Matrix Predict(const MlpModel& model, const Matrix& batch);

// Backpropagates `output_grad` (d loss / d final activation) through the
// recorded activations. Activation derivatives are recovered from outputs,
// which is exact for identity, ReLU and LeakyReLU with positive slope.
BackwardResult Backward(const MlpModel& model,
                        std::span<const Matrix> activations,
                        const Matrix& output_grad);

// Row-wise softmax with max subtraction.
Matrix Softmax(const Matrix& logits);

enum class Reduction { kMean, kSum };

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

// Cross-entropy over softmax(logits). Probabilities are clamped at 1e-12
// before the log. With kMean the loss and gradient are divided by the batch
// size; with kSum they are not.
LossAndGrad SoftmaxCrossEntropy(const Matrix& logits,
                                std::span<const int> labels,
                                Reduction reduction = Reduction::kMean);

// Mean over rows of ||softmax(logits) - targets||^2, differentiated with
// respect to the logits. `row_mask`, when nonempty, selects contributing
// rows; the mean is taken over selected rows.
LossAndGrad SoftmaxSquaredError(const Matrix& logits, const Matrix& targets,
                                std::span<const bool> row_mask = {});

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState(const MlpModel& model, AdamConfig config);

  const AdamConfig& config() const { return config_; }
  std::size_t step() const { return step_; }

 private:
  friend void AdamStep(MlpModel&, const GradBundle&, AdamState&);

  AdamConfig config_;
  GradBundle first_moment_;
  GradBundle second_moment_;
  std::size_t step_ = 0;
};

// One bias-corrected Adam update in place.
void AdamStep(MlpModel& model, const GradBundle& grads, AdamState& state);

// Central-difference comparison of the cross-entropy gradient. Samples at
// most `max_coords_per_tensor` coordinates from each weight matrix, bias
// vector, and the input batch. Relative error is |a - n| / max(|n|, 1e-3).
double FiniteDiffCheck(const MlpModel& model, const Matrix& batch,
                       std::span<const int> labels, double epsilon,
                       std::size_t max_coords_per_tensor = 200,
                       std::uint64_t seed = 0);

// Same comparison against caller-provided analytic gradients.
double CompareWithFiniteDifferences(const MlpModel& model, const Matrix& batch,
                                    std::span<const int> labels,
                                    const GradBundle& grads,
                                    const Matrix& input_grad, double epsilon,
                                    std::size_t max_coords_per_tensor = 200,
                                    std::uint64_t seed = 0);

}  // namespace sgzsl

#endif  // SGZSL_MLP_H_
