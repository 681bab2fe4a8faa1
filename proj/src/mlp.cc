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

#include "sgzsl/mlp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgzsl/errors.h"

namespace sgzsl {
namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr double kRelativeErrorFloor = 1e-3;

double Apply(const Activation& act, double x) {
  switch (act.kind) {
    case ActivationKind::kIdentity:
      return x;
    case ActivationKind::kRelu:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::kLeakyRelu:
      return x > 0.0 ? x : act.slope * x;
  }
  return x;
}

double DerivativeFromOutput(const Activation& act, double y) {
  switch (act.kind) {
    case ActivationKind::kIdentity:
      return 1.0;
    case ActivationKind::kRelu:
      return y > 0.0 ? 1.0 : 0.0;
    case ActivationKind::kLeakyRelu:
      return y > 0.0 ? 1.0 : act.slope;
  }
  return 1.0;
}

void CheckLabels(std::span<const int> labels, std::size_t rows,
                 std::size_t classes) {
  if (labels.size() != rows) {
    throw DimensionError("labels: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(rows) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw DimensionError("label " + std::to_string(y) + " outside [0, " +
                           std::to_string(classes) + ")");
    }
  }
}

double CrossEntropyLoss(const MlpModel& model, const Matrix& batch,
                        std::span<const int> labels) {
  return SoftmaxCrossEntropy(Predict(model, batch), labels).loss;
}

std::vector<std::size_t> SampleCoords(std::size_t size, std::size_t limit,
                                      Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  if (size > limit) {
    rng.Shuffle(idx);
    idx.resize(limit);
  }
  return idx;
}

double RelativeError(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(std::abs(numeric), kRelativeErrorFloor);
}

}  // namespace

std::string ActivationName(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kIdentity:
      return "identity";
    case ActivationKind::kRelu:
      return "relu";
    case ActivationKind::kLeakyRelu:
      return "leaky_relu";
  }
  return "identity";
}

ActivationKind ParseActivationKind(const std::string& name) {
  if (name == "identity") return ActivationKind::kIdentity;
  if (name == "relu") return ActivationKind::kRelu;
  if (name == "leaky_relu") return ActivationKind::kLeakyRelu;
  throw ConfigError("activation", "unknown activation '" + name + "'");
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& l = layers_[i];
    if (l.bias.size() != l.weight.cols()) {
      throw DimensionError("layer " + std::to_string(i) + ": bias size " +
                           std::to_string(l.bias.size()) + " vs " +
                           std::to_string(l.weight.cols()) + " units");
    }
    if (i > 0 && layers_[i - 1].weight.cols() != l.weight.rows()) {
      throw DimensionError("layer " + std::to_string(i) + ": fan-in " +
                           std::to_string(l.weight.rows()) +
                           " does not match previous width " +
                           std::to_string(layers_[i - 1].weight.cols()));
    }
  }
}

MlpModel MlpModel::Create(std::span<const std::size_t> layer_dims,
                          std::span<const Activation> activations, Rng& rng) {
  if (layer_dims.size() < 2) {
    throw DimensionError("MlpModel needs at least input and output dims");
  }
  if (activations.size() != layer_dims.size() - 1) {
    throw DimensionError("MlpModel: " + std::to_string(activations.size()) +
                         " activations for " +
                         std::to_string(layer_dims.size() - 1) + " layers");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    const std::size_t fan_in = layer_dims[i];
    const std::size_t fan_out = layer_dims[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_in, fan_out), std::vector<double>(fan_out),
                     activations[i]};
    for (double& w : layer.weight.data()) w = rng.Uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.Uniform(-bound, bound);
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

void SetModelOrigin(MlpModel& model, Origin origin) {
  for (auto& layer : model.mutable_layers()) layer.weight.set_origin(origin);
}

bool AnyWeightHasOrigin(const MlpModel& model, Origin origin) {
  for (const auto& layer : model.layers()) {
    if (layer.weight.origin() == origin) return true;
  }
  return false;
}

std::size_t MlpModel::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().weight.rows();
}

std::size_t MlpModel::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().weight.cols();
}

std::size_t MlpModel::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<std::size_t> MlpModel::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers_.empty()) return dims;
  dims.push_back(input_dim());
  for (const auto& l : layers_) dims.push_back(l.weight.cols());
  return dims;
}

bool MlpModel::operator==(const MlpModel& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (!(a.weight == b.weight) || a.bias != b.bias ||
        !(a.activation == b.activation)) {
      return false;
    }
  }
  return true;
}

GradBundle GradBundle::ZerosLike(const MlpModel& model) {
  GradBundle g;
  for (const auto& l : model.layers()) {
    g.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()),
                        std::vector<double>(l.bias.size(), 0.0)});
  }
  return g;
}

void GradBundle::AddInPlace(const GradBundle& other) {
  if (other.layers.size() != layers.size()) {
    throw DimensionError("GradBundle::AddInPlace: layer count mismatch");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    sgzsl::AddInPlace(layers[i].weight, other.layers[i].weight);
    if (layers[i].bias.size() != other.layers[i].bias.size()) {
      throw DimensionError("GradBundle::AddInPlace: bias size mismatch");
    }
    for (std::size_t j = 0; j < layers[i].bias.size(); ++j) {
      layers[i].bias[j] += other.layers[i].bias[j];
    }
  }
}

void GradBundle::ScaleInPlace(double factor) {
  ForEach([factor](double& v) { v *= factor; });
}

void GradBundle::DivideInPlace(double n) {
  ForEach([n](double& v) { v /= n; });
}

double GradBundle::SquaredNorm() const {
  double acc = 0.0;
  ForEach([&acc](double v) { acc += v * v; });
  return acc;
}

double GradBundle::Norm() const { return std::sqrt(SquaredNorm()); }

void GradBundle::ForEach(const std::function<void(double&)>& fn) {
  for (auto& l : layers) {
    for (double& v : l.weight.data()) fn(v);
    for (double& v : l.bias) fn(v);
  }
}

void GradBundle::ForEach(const std::function<void(double)>& fn) const {
  for (const auto& l : layers) {
    for (double v : l.weight.data()) fn(v);
    for (double v : l.bias) fn(v);
  }
}

bool GradBundle::operator==(const GradBundle& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!(layers[i].weight == other.layers[i].weight) ||
        layers[i].bias != other.layers[i].bias) {
      return false;
    }
  }
  return true;
}

std::vector<Matrix> Forward(const MlpModel& model, const Matrix& batch) {
  if (model.num_layers() == 0) throw DimensionError("Forward: empty model");
  if (batch.cols() != model.input_dim()) {
    throw DimensionError("Forward: batch has " + std::to_string(batch.cols()) +
                         " columns, model expects " +
                         std::to_string(model.input_dim()));
  }
  std::vector<Matrix> acts;
  acts.reserve(model.num_layers() + 1);
  acts.push_back(batch);
  for (const auto& layer : model.layers()) {
    Matrix z = MatMul(acts.back(), layer.weight);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        row[c] = Apply(layer.activation, row[c] + layer.bias[c]);
      }
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

Matrix Predict(const MlpModel& model, const Matrix& batch) {
  return std::move(Forward(model, batch).back());
}

BackwardResult Backward(const MlpModel& model,
                        std::span<const Matrix> activations,
                        const Matrix& output_grad) {
  const std::size_t n_layers = model.num_layers();
  if (activations.size() != n_layers + 1) {
    throw DimensionError("Backward: expected " + std::to_string(n_layers + 1) +
                         " activations, got " +
                         std::to_string(activations.size()));
  }
  const Matrix& out = activations.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw DimensionError("Backward: output_grad shape does not match output");
  }
  BackwardResult result;
  result.grads.layers.resize(n_layers);
  Matrix delta = output_grad;
  for (std::size_t li = n_layers; li-- > 0;) {
    const DenseLayer& layer = model.layers()[li];
    const Matrix& y = activations[li + 1];
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto d = delta.row(r);
      auto yr = y.row(r);
      for (std::size_t c = 0; c < d.size(); ++c) {
        d[c] *= DerivativeFromOutput(layer.activation, yr[c]);
      }
    }
    LayerGrad& g = result.grads.layers[li];
    g.weight = MatMulTransA(activations[li], delta);
    g.bias.assign(delta.cols(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto d = delta.row(r);
      for (std::size_t c = 0; c < d.size(); ++c) g.bias[c] += d[c];
    }
    delta = MatMulTransB(delta, layer.weight);
  }
  result.input_grad = std::move(delta);
  return result;
}

Matrix Softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - mx);
      total += o[c];
    }
    for (double& v : o) v /= total;
  }
  return out;
}

LossAndGrad SoftmaxCrossEntropy(const Matrix& logits,
                                std::span<const int> labels,
                                Reduction reduction) {
  CheckLabels(labels, logits.rows(), logits.cols());
  LossAndGrad result;
  result.grad = Softmax(logits);
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto p = result.grad.row(r);
    const auto y = static_cast<std::size_t>(labels[r]);
    total -= std::log(std::max(p[y], kProbabilityFloor));
    p[y] -= 1.0;
  }
  if (reduction == Reduction::kMean && logits.rows() > 0) {
    const auto n = static_cast<double>(logits.rows());
    result.loss = total / n;
    for (double& v : result.grad.data()) v /= n;
  } else {
    result.loss = total;
  }
  return result;
}

LossAndGrad SoftmaxSquaredError(const Matrix& logits, const Matrix& targets,
                                std::span<const bool> row_mask) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw DimensionError("SoftmaxSquaredError: logits and targets differ");
  }
  if (!row_mask.empty() && row_mask.size() != logits.rows()) {
    throw DimensionError("SoftmaxSquaredError: mask length mismatch");
  }
  const Matrix p = Softmax(logits);
  LossAndGrad result;
  result.grad = Matrix(logits.rows(), logits.cols());
  std::size_t active = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (row_mask.empty() || row_mask[r]) ++active;
  }
  if (active == 0) return result;
  const auto n = static_cast<double>(active);
  std::vector<double> g(logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (!row_mask.empty() && !row_mask[r]) continue;
    auto pr = p.row(r);
    auto tr = targets.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < pr.size(); ++c) {
      const double diff = pr[c] - tr[c];
      result.loss += diff * diff;
      g[c] = 2.0 * diff / n;
      dot += g[c] * pr[c];
    }
    auto out = result.grad.row(r);
    for (std::size_t c = 0; c < pr.size(); ++c) out[c] = pr[c] * (g[c] - dot);
  }
  result.loss /= n;
  return result;
}

AdamState::AdamState(const MlpModel& model, AdamConfig config)
    : config_(config),
      first_moment_(GradBundle::ZerosLike(model)),
      second_moment_(GradBundle::ZerosLike(model)) {}

void AdamStep(MlpModel& model, const GradBundle& grads, AdamState& state) {
  auto& layers = model.mutable_layers();
  if (grads.layers.size() != layers.size() ||
      state.first_moment_.layers.size() != layers.size()) {
    throw DimensionError("AdamStep: gradient/model layer count mismatch");
  }
  const AdamConfig& cfg = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto update = [&](double& param, double g, double& m, double& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    param -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& w = layers[i].weight;
    const auto& gw = grads.layers[i].weight;
    auto& mw = state.first_moment_.layers[i].weight;
    auto& vw = state.second_moment_.layers[i].weight;
    if (gw.rows() != w.rows() || gw.cols() != w.cols() ||
        grads.layers[i].bias.size() != layers[i].bias.size()) {
      throw DimensionError("AdamStep: layer " + std::to_string(i) +
                           " gradient shape mismatch");
    }
    for (std::size_t k = 0; k < w.size(); ++k) {
      update(w.data()[k], gw.data()[k], mw.data()[k], vw.data()[k]);
    }
    auto& b = layers[i].bias;
    for (std::size_t k = 0; k < b.size(); ++k) {
      update(b[k], grads.layers[i].bias[k],
             state.first_moment_.layers[i].bias[k],
             state.second_moment_.layers[i].bias[k]);
    }
  }
}

double CompareWithFiniteDifferences(const MlpModel& model, const Matrix& batch,
                                    std::span<const int> labels,
                                    const GradBundle& grads,
                                    const Matrix& input_grad, double epsilon,
                                    std::size_t max_coords_per_tensor,
                                    std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  Rng rng(seed);
  MlpModel probe = model;
  double worst = 0.0;
  auto central = [&](double& slot) {
    const double saved = slot;
    slot = saved + epsilon;
    const double up = CrossEntropyLoss(probe, batch, labels);
    slot = saved - epsilon;
    const double down = CrossEntropyLoss(probe, batch, labels);
    slot = saved;
    return (up - down) / (2.0 * epsilon);
  };
  for (std::size_t li = 0; li < probe.num_layers(); ++li) {
    auto& layer = probe.mutable_layers()[li];
    for (std::size_t k : SampleCoords(layer.weight.size(),
                                      max_coords_per_tensor, rng)) {
      const double numeric = central(layer.weight.data()[k]);
      worst = std::max(
          worst, RelativeError(grads.layers[li].weight.data()[k], numeric));
    }
    for (std::size_t k :
         SampleCoords(layer.bias.size(), max_coords_per_tensor, rng)) {
      const double numeric = central(layer.bias[k]);
      worst = std::max(worst,
                       RelativeError(grads.layers[li].bias[k], numeric));
    }
  }
  Matrix perturbed = batch;
  for (std::size_t k :
       SampleCoords(batch.size(), max_coords_per_tensor, rng)) {
    double& slot = perturbed.data()[k];
    const double saved = slot;
    slot = saved + epsilon;
    const double up = CrossEntropyLoss(probe, perturbed, labels);
    slot = saved - epsilon;
    const double down = CrossEntropyLoss(probe, perturbed, labels);
    slot = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    worst = std::max(worst, RelativeError(input_grad.data()[k], numeric));
  }
  return worst;
}

double FiniteDiffCheck(const MlpModel& model, const Matrix& batch,
                       std::span<const int> labels, double epsilon,
                       std::size_t max_coords_per_tensor, std::uint64_t seed) {
  const auto acts = Forward(model, batch);
  const auto loss = SoftmaxCrossEntropy(acts.back(), labels);
  const auto back = Backward(model, acts, loss.grad);
  return CompareWithFiniteDifferences(model, batch, labels, back.grads,
                                      back.input_grad, epsilon,
                                      max_coords_per_tensor, seed);
}

}  // namespace sgzsl
