// Copyright 2026 The RPG Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rpg/nn.h"

#include <cmath>
#include <string>

#include "rpg/errors.h"
#include "rpg/random.h"

namespace rpg {
namespace {

double Activate(Activation act, double z) {
  return act == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative expressed through the pre-activation z and activation a.
// ReLU'(0) is taken as 0.
double ActivateDerivative(Activation act, double z, double a) {
  return act == Activation::kRelu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - a * a;
}

struct Tape {
  std::vector<Vector> inputs;  // input to layer l
  std::vector<Vector> pre;     // pre-activation of layer l
  Vector logits;
};

Tape RunForward(const DenseNet& net, const Eigen::Ref<const Vector>& x) {
  if (x.size() != net.input_dim()) {
    throw InvalidArgument("forward: feature width " + std::to_string(x.size()) +
                          " != network input width " +
                          std::to_string(net.input_dim()));
  }
  const auto& layers = net.layers();
  Tape tape;
  tape.inputs.reserve(layers.size());
  tape.pre.reserve(layers.size());
  Vector a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vector z = layers[l].weight * a + layers[l].bias;
    tape.inputs.push_back(std::move(a));
    if (l + 1 == layers.size()) {
      tape.logits = z;
    } else {
      a = z.unaryExpr([&](double v) { return Activate(net.activation(), v); });
    }
    tape.pre.push_back(std::move(z));
  }
  return tape;
}

void CheckLabel(const DenseNet& net, int label, const LossSpec& spec) {
  const int limit = spec.kind == LossKind::kCrossEntropy ? net.output_dim() : 1;
  if (spec.kind == LossKind::kSquared && net.output_dim() != 1) {
    throw InvalidArgument("squared loss requires a single-output network");
  }
  if (spec.kind == LossKind::kCrossEntropy && (label < 0 || label >= limit)) {
    throw InvalidArgument("label " + std::to_string(label) +
                          " outside [0, " + std::to_string(limit) + ")");
  }
}

double LogSumExp(const Vector& v) {
  const double peak = v.maxCoeff();
  return peak + std::log((v.array() - peak).exp().sum());
}

// Raw (unclipped) loss and d loss / d logits.
double RawLoss(const Vector& logits, int label, const LossSpec& spec,
               Vector* dlogits) {
  if (spec.kind == LossKind::kSquared) {
    const double diff = logits(0) - static_cast<double>(label);
    if (dlogits) *dlogits = Vector::Constant(1, 2.0 * diff);
    return diff * diff;
  }
  const double lse = LogSumExp(logits);
  // Clamp at 0 because lse - logit can round to a tiny negative value.
  const double loss = std::max(0.0, lse - logits(label));
  if (dlogits) {
    *dlogits = (logits.array() - lse).exp().matrix();
    (*dlogits)(label) -= 1.0;
  }
  return loss;
}

enum class Want { kParams, kInput };

// Backpropagates dz (d loss / d logits) through the tape. Fills either the
// flat parameter gradient or the input gradient.
void Backward(const DenseNet& net, const Tape& tape, Vector dz, Want want,
              Vector& out) {
  const auto& layers = net.layers();
  if (want == Want::kParams) out.setZero(static_cast<Eigen::Index>(net.ParameterCount()));
  // Offsets of each layer's block in the flat vector.
  std::vector<Eigen::Index> offsets(layers.size());
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    offsets[l] = offset;
    offset += layers[l].weight.size() + layers[l].bias.size();
  }
  for (std::size_t li = layers.size(); li-- > 0;) {
    const DenseLayer& layer = layers[li];
    if (want == Want::kParams) {
      Eigen::Map<Matrix> dw(out.data() + offsets[li], layer.weight.rows(),
                            layer.weight.cols());
      dw.noalias() = dz * tape.inputs[li].transpose();
      out.segment(offsets[li] + layer.weight.size(), layer.bias.size()) = dz;
    }
    Vector da = layer.weight.transpose() * dz;
    if (li == 0) {
      if (want == Want::kInput) out = std::move(da);
      return;
    }
    const Vector& z = tape.pre[li - 1];
    const Vector& a = tape.inputs[li];
    for (Eigen::Index i = 0; i < da.size(); ++i) {
      da(i) *= ActivateDerivative(net.activation(), z(i), a(i));
    }
    dz = std::move(da);
  }
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
  if (layers_.empty()) throw InvalidArgument("DenseNet: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weight.rows() != layer.bias.size() || layer.weight.size() == 0) {
      throw InvalidArgument("DenseNet: layer " + std::to_string(l) +
                            " weight rows != bias length");
    }
    if (l > 0 && layers_[l - 1].weight.rows() != layer.weight.cols()) {
      throw InvalidArgument("DenseNet: layer " + std::to_string(l) +
                            " input width does not match previous output");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw InvalidArgument("DenseNet: non-finite parameter in layer " +
                            std::to_string(l));
    }
  }
}

DenseNet DenseNet::Initialize(std::span<const int> widths,
                              Activation activation, uint64_t seed) {
  if (widths.size() < 2) throw InvalidArgument("Initialize: need >= 2 widths");
  RandomStream rng(seed, StreamId(StreamTag::kInit, 0));
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] < 1 || widths[l + 1] < 1) {
      throw InvalidArgument("Initialize: widths must be positive");
    }
    const double scale = std::sqrt(2.0 / widths[l]);
    DenseLayer layer{Matrix(widths[l + 1], widths[l]),
                     Vector::Zero(widths[l + 1])};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = scale * rng.Normal();
      }
    }
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers), activation);
}

DenseNet DenseNet::FromFlat(std::span<const int> widths, Activation activation,
                            const Vector& params) {
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    layers.push_back({Matrix::Zero(widths[l + 1], widths[l]),
                      Vector::Zero(widths[l + 1])});
  }
  DenseNet net(std::move(layers), activation);
  net.AssignFlat(params);
  return net;
}

int DenseNet::input_dim() const {
  return static_cast<int>(layers_.front().weight.cols());
}

int DenseNet::output_dim() const {
  return static_cast<int>(layers_.back().weight.rows());
}

std::vector<int> DenseNet::Widths() const {
  std::vector<int> widths{input_dim()};
  for (const auto& layer : layers_) {
    widths.push_back(static_cast<int>(layer.weight.rows()));
  }
  return widths;
}

std::size_t DenseNet::ParameterCount() const {
  std::size_t count = 0;
  for (const auto& layer : layers_) {
    count += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  }
  return count;
}

Vector DenseNet::Flatten() const {
  Vector flat(static_cast<Eigen::Index>(ParameterCount()));
  Eigen::Index offset = 0;
  for (const auto& layer : layers_) {
    flat.segment(offset, layer.weight.size()) =
        Eigen::Map<const Vector>(layer.weight.data(), layer.weight.size());
    offset += layer.weight.size();
    flat.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return flat;
}

void DenseNet::AssignFlat(const Vector& params) {
  if (static_cast<std::size_t>(params.size()) != ParameterCount()) {
    throw InvalidArgument("AssignFlat: expected " +
                          std::to_string(ParameterCount()) + " values, got " +
                          std::to_string(params.size()));
  }
  if (!params.allFinite()) throw InvalidArgument("AssignFlat: non-finite value");
  Eigen::Index offset = 0;
  for (auto& layer : layers_) {
    Eigen::Map<Vector>(layer.weight.data(), layer.weight.size()) =
        params.segment(offset, layer.weight.size());
    offset += layer.weight.size();
    layer.bias = params.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
}

bool DenseNet::operator==(const DenseNet& other) const {
  return activation_ == other.activation_ && Widths() == other.Widths() &&
         Flatten() == other.Flatten();
}

Vector Logits(const DenseNet& net, const Eigen::Ref<const Vector>& features) {
  return RunForward(net, features).logits;
}

Matrix Forward(const DenseNet& net, const Matrix& features) {
  if (features.cols() != net.input_dim()) {
    throw InvalidArgument("forward: feature width " +
                          std::to_string(features.cols()) +
                          " != network input width " +
                          std::to_string(net.input_dim()));
  }
  Matrix logits(features.rows(), net.output_dim());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    logits.row(i) = Logits(net, features.row(i).transpose()).transpose();
  }
  return logits;
}

double ExampleLoss(const DenseNet& net, const Eigen::Ref<const Vector>& features,
                   int label, const LossSpec& spec) {
  CheckLabel(net, label, spec);
  const Vector logits = Logits(net, features);
  return std::min(RawLoss(logits, label, spec, nullptr), spec.clip_m);
}

BatchLoss LossBatch(const DenseNet& net, const LabeledSet& batch,
                    const LossSpec& spec) {
  BatchLoss result;
  result.per_example.reserve(batch.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double loss =
        ExampleLoss(net, batch.features().row(static_cast<Eigen::Index>(i)).transpose(),
                    batch.labels()[i], spec);
    result.per_example.push_back(loss);
    sum += loss;
  }
  result.mean = sum / static_cast<double>(batch.size());
  return result;
}

ExampleGradient GradExample(const DenseNet& net,
                            const Eigen::Ref<const Vector>& features, int label,
                            const LossSpec& spec) {
  CheckLabel(net, label, spec);
  const Tape tape = RunForward(net, features);
  Vector dlogits;
  const double raw = RawLoss(tape.logits, label, spec, &dlogits);
  ExampleGradient result;
  result.clipped = raw > spec.clip_m;
  result.loss = std::min(raw, spec.clip_m);
  if (result.clipped) {
    result.grad.values = Vector::Zero(static_cast<Eigen::Index>(net.ParameterCount()));
  } else {
    Backward(net, tape, std::move(dlogits), Want::kParams, result.grad.values);
  }
  return result;
}

ParamGradients GradParams(const DenseNet& net, const LabeledSet& batch,
                          const LossSpec& spec) {
  ParamGradients result;
  result.per_example.reserve(batch.size());
  result.losses.reserve(batch.size());
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(net.ParameterCount()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto g = GradExample(net, batch.features().row(static_cast<Eigen::Index>(i)).transpose(),
                         batch.labels()[i], spec);
    sum += g.grad.values;
    result.losses.push_back(g.loss);
    result.per_example.push_back(std::move(g.grad));
  }
  result.mean.values = sum / static_cast<double>(batch.size());
  return result;
}

GradientSummary SummarizeGradients(const DenseNet& net, const LabeledSet& batch,
                                   const LossSpec& spec) {
  GradientSummary result;
  result.norms.reserve(batch.size());
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(net.ParameterCount()));
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto g = GradExample(
        net, batch.features().row(static_cast<Eigen::Index>(i)).transpose(),
        batch.labels()[i], spec);
    sum += g.grad.values;
    loss_sum += g.loss;
    result.norms.push_back(g.grad.Norm());
  }
  result.mean.values = sum / static_cast<double>(batch.size());
  result.mean_loss = loss_sum / static_cast<double>(batch.size());
  return result;
}

Vector GradInput(const DenseNet& net, const Eigen::Ref<const Vector>& features,
                 int label, const LossSpec& spec) {
  CheckLabel(net, label, spec);
  const Tape tape = RunForward(net, features);
  Vector dlogits;
  const double raw = RawLoss(tape.logits, label, spec, &dlogits);
  if (raw > spec.clip_m) return Vector::Zero(features.size());
  Vector grad;
  Backward(net, tape, std::move(dlogits), Want::kInput, grad);
  return grad;
}

std::vector<bool> ActivationPattern(const DenseNet& net,
                                    const Eigen::Ref<const Vector>& features) {
  const Tape tape = RunForward(net, features);
  std::vector<bool> pattern;
  for (std::size_t l = 0; l + 1 < tape.pre.size(); ++l) {
    for (Eigen::Index i = 0; i < tape.pre[l].size(); ++i) {
      pattern.push_back(tape.pre[l](i) > 0.0);
    }
  }
  return pattern;
}

int ArgMax(const Eigen::Ref<const Vector>& values) {
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = static_cast<int>(i);
  }
  return best;
}

double Accuracy(const DenseNet& net, const LabeledSet& set) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vector logits =
        Logits(net, set.features().row(static_cast<Eigen::Index>(i)).transpose());
    if (ArgMax(logits) == set.labels()[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

}  // namespace rpg
