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

#include "rpg/adversarial.h"

#include <algorithm>
#include <cmath>

#include "rpg/errors.h"

namespace rpg {

void AttackSpec::Validate() const {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("attack radius must be finite and >= 0");
  }
  if (steps < 0) throw InvalidArgument("attack steps must be >= 0");
  if (radius > 0.0 && steps > 0 && !(StepSize() > 0.0)) {
    throw InvalidArgument("attack step size must be positive");
  }
}

FeasibilityCounter& FeasibilityCounter::operator+=(
    const FeasibilityCounter& other) {
  checked += other.checked;
  violations += other.violations;
  worst_excess = std::max(worst_excess, other.worst_excess);
  return *this;
}

double Distance(const Vector& a, const Vector& b, NormKind norm) {
  const Vector diff = a - b;
  return norm == NormKind::kLinf ? diff.lpNorm<Eigen::Infinity>() : diff.norm();
}

Vector Project(const Vector& center, const Vector& point, NormKind norm,
               double radius) {
  if (center.size() != point.size()) {
    throw InvalidArgument("Project: vectors differ in length");
  }
  if (norm == NormKind::kLinf) {
    Vector out = point;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out(i) = std::clamp(point(i), center(i) - radius, center(i) + radius);
    }
    return out;
  }
  const Vector offset = point - center;
  const double length = offset.norm();
  if (length <= radius) return point;
  return center + offset * (radius / length);
}

Vector PgdAttack(const DenseNet& net, const Vector& features, int label,
                 const AttackSpec& attack, const LossSpec& loss,
                 FeasibilityCounter* counter) {
  attack.Validate();
  if (attack.radius == 0.0 || attack.steps == 0) return features;
  const double alpha = attack.StepSize();
  Vector x = features;
  for (int k = 0; k < attack.steps; ++k) {
    const Vector grad = GradInput(net, x, label, loss);
    Vector stepped;
    if (attack.norm == NormKind::kLinf) {
      stepped = x + alpha * grad.unaryExpr([](double g) {
        return static_cast<double>((g > 0.0) - (g < 0.0));
      });
    } else {
      stepped = x + alpha * grad;
    }
    x = Project(features, stepped, attack.norm, attack.radius);
  }
  if (counter) {
    const double excess =
        Distance(x, features, attack.norm) - attack.radius;
    ++counter->checked;
    if (excess > kFeasibilityTolerance) ++counter->violations;
    counter->worst_excess = std::max(counter->worst_excess, excess);
  }
  return x;
}

LabeledSet AdversarialBatch(const DenseNet& net, const LabeledSet& batch,
                            const AttackSpec& attack, const LossSpec& loss,
                            FeasibilityCounter* counter) {
  Matrix adv = batch.features();
  for (Eigen::Index i = 0; i < adv.rows(); ++i) {
    adv.row(i) = PgdAttack(net, batch.features().row(i).transpose(),
                           batch.labels()[static_cast<std::size_t>(i)], attack,
                           loss, counter)
                     .transpose();
  }
  return LabeledSet(std::move(adv), batch.labels(), batch.num_classes());
}

ParamGradients AdvGrad(const DenseNet& net, const LabeledSet& batch,
                       const AttackSpec& attack, const LossSpec& loss,
                       FeasibilityCounter* counter) {
  return GradParams(net, AdversarialBatch(net, batch, attack, loss, counter),
                    loss);
}

}  // namespace rpg
