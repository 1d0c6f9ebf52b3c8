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

#ifndef RPG_NN_H_
#define RPG_NN_H_

#include <cstdint>
#include <span>
#include <vector>

#include "rpg/data.h"

namespace rpg {

enum class Activation { kRelu, kTanh };

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Fully connected classifier h_theta. The activation is applied between
// layers; the output layer is linear (logits).
//
// Flattened parameter order: for each layer in turn, the weight matrix in
// row-major order followed by the bias vector.
class DenseNet {
 public:
  // Throws InvalidArgument when layer dimensions do not chain or any
  // parameter is non-finite.
  DenseNet(std::vector<DenseLayer> layers, Activation activation);

  // He-style Gaussian init (std sqrt(2 / fan_in)) with zero biases, drawn from
  // the Philox stream (seed, StreamId(kInit, 0)). widths = {d_in, ..., d_out}.
  static DenseNet Initialize(std::span<const int> widths,
                             Activation activation, uint64_t seed);
  static DenseNet FromFlat(std::span<const int> widths, Activation activation,
                           const Vector& params);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  Activation activation() const { return activation_; }
  int input_dim() const;
  int output_dim() const;
  std::vector<int> Widths() const;
  std::size_t ParameterCount() const;

  Vector Flatten() const;
  // Overwrites the parameters from a flat vector of ParameterCount() entries.
  void AssignFlat(const Vector& params);

  bool operator==(const DenseNet& other) const;

 private:
  std::vector<DenseLayer> layers_;
  Activation activation_;
};

enum class LossKind {
  kCrossEntropy,
  // (logit_0 - y)^2 on single-output nets; used for 1-D hand-checkable cases.
  kSquared,
};

// Per-example loss is min(raw, clip_m), so 0 <= loss <= clip_m. An example
// whose raw loss exceeds clip_m contributes a zero gradient.
struct LossSpec {
  LossKind kind = LossKind::kCrossEntropy;
  double clip_m = 10.0;
};

// Gradient in the flattened parameter order. Norm() is the Euclidean norm.
struct GradVector {
  Vector values;
  double Norm() const { return values.norm(); }
};

struct BatchLoss {
  double mean = 0.0;
  std::vector<double> per_example;
};

struct ParamGradients {
  GradVector mean;
  std::vector<GradVector> per_example;
  std::vector<double> losses;  // clipped per-example losses
};

// Per-example result of one forward/backward pass.
struct ExampleGradient {
  double loss = 0.0;
  bool clipped = false;
  GradVector grad;
};

Vector Logits(const DenseNet& net, const Eigen::Ref<const Vector>& features);
Matrix Forward(const DenseNet& net, const Matrix& features);

double ExampleLoss(const DenseNet& net, const Eigen::Ref<const Vector>& features,
                   int label, const LossSpec& spec);
BatchLoss LossBatch(const DenseNet& net, const LabeledSet& batch,
                    const LossSpec& spec);

ExampleGradient GradExample(const DenseNet& net,
                            const Eigen::Ref<const Vector>& features, int label,
                            const LossSpec& spec);
ParamGradients GradParams(const DenseNet& net, const LabeledSet& batch,
                          const LossSpec& spec);

// Mean gradient, mean loss and per-example gradient norms without keeping the
// per-example vectors. Numerically identical to GradParams.
struct GradientSummary {
  GradVector mean;
  double mean_loss = 0.0;
  std::vector<double> norms;
};
GradientSummary SummarizeGradients(const DenseNet& net, const LabeledSet& batch,
                                   const LossSpec& spec);

// d loss / d features for one example.
Vector GradInput(const DenseNet& net, const Eigen::Ref<const Vector>& features,
                 int label, const LossSpec& spec);

// Pre-activation signs for every hidden unit, used by gradient checks to spot
// ReLU kink crossings.
std::vector<bool> ActivationPattern(const DenseNet& net,
                                    const Eigen::Ref<const Vector>& features);

// Index of the largest entry; the first index wins ties.
int ArgMax(const Eigen::Ref<const Vector>& values);

// Fraction of examples whose argmax logit equals the label.
double Accuracy(const DenseNet& net, const LabeledSet& set);

}  // namespace rpg

#endif  // RPG_NN_H_
