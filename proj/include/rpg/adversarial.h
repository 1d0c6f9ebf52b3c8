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

#ifndef RPG_ADVERSARIAL_H_
#define RPG_ADVERSARIAL_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "rpg/data.h"
#include "rpg/nn.h"

namespace rpg {

enum class NormKind { kLinf, kL2 };

// PGD settings. step_size defaults to radius / 4 and steps to 8.
struct AttackSpec {
  NormKind norm = NormKind::kLinf;
  double radius = 0.0;
  int steps = 8;
  std::optional<double> step_size;

  double StepSize() const { return step_size.value_or(radius / 4.0); }
  // Throws InvalidArgument on negative radius/steps or non-positive step.
  void Validate() const;
};

// Counts PGD outputs and how many of them left the radius ball by more
// than kFeasibilityTolerance. One counter per run; not thread-safe.
struct FeasibilityCounter {
  uint64_t checked = 0;
  uint64_t violations = 0;
  double worst_excess = 0.0;

  FeasibilityCounter& operator+=(const FeasibilityCounter& other);
};

inline constexpr double kFeasibilityTolerance = 1e-9;

double Distance(const Vector& a, const Vector& b, NormKind norm);

// Nearest point of the closed ball B(center, radius). L-inf clamps each
// coordinate, L2 scales the offset radially. Points already inside come back
// unchanged.
Vector Project(const Vector& center, const Vector& point, NormKind norm,
               double radius);

// K-step projected gradient ascent on the loss, starting at the clean input.
// L-inf steps by step_size * sign(grad); L2 steps by step_size * grad.
// Returns the clean features when radius or steps is zero.
Vector PgdAttack(const DenseNet& net, const Vector& features, int label,
                 const AttackSpec& attack, const LossSpec& loss,
                 FeasibilityCounter* counter = nullptr);

// Replaces every row of `batch` with its PGD point.
LabeledSet AdversarialBatch(const DenseNet& net, const LabeledSet& batch,
                            const AttackSpec& attack, const LossSpec& loss,
                            FeasibilityCounter* counter = nullptr);

// Adversarial mini-batch gradient: parameter gradients evaluated at each
// example's PGD point. `losses` holds the per-example adversarial losses.
// With radius 0 this is exactly GradParams on the clean batch.
ParamGradients AdvGrad(const DenseNet& net, const LabeledSet& batch,
                       const AttackSpec& attack, const LossSpec& loss,
                       FeasibilityCounter* counter = nullptr);

}  // namespace rpg

#endif  // RPG_ADVERSARIAL_H_
