// Copyright 2026 The zoopt Authors.
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

#include "zoopt/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace zoopt {

namespace {

struct KindName {
  OptimizerKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {OptimizerKind::kZoSgd, "zo_sgd"},
    {OptimizerKind::kZoSgdSign, "zo_sgd_sign"},
    {OptimizerKind::kZoSgdMmt, "zo_sgd_mmt"},
    {OptimizerKind::kZoSgdCons, "zo_sgd_cons"},
    {OptimizerKind::kZoAdam, "zo_adam"},
    {OptimizerKind::kForwardGrad, "forward_grad"},
    {OptimizerKind::kFoSgd, "fo_sgd"},
    {OptimizerKind::kFoAdam, "fo_adam"},
};

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::string_view ToString(OptimizerKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

OptimizerKind ParseOptimizerKind(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  throw InvalidArgument("unknown optimizer kind '" + std::string(name) + "'");
}

bool IsZerothOrder(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kZoSgd:
    case OptimizerKind::kZoSgdSign:
    case OptimizerKind::kZoSgdMmt:
    case OptimizerKind::kZoSgdCons:
    case OptimizerKind::kZoAdam:
      return true;
    default:
      return false;
  }
}

bool IsFirstOrder(OptimizerKind kind) {
  return kind == OptimizerKind::kFoSgd || kind == OptimizerKind::kFoAdam;
}

void HyperParams::Validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InvalidArgument("learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidArgument("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidArgument("beta2 must lie in [0, 1)");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("mu must be positive");
  if (q < 1) throw InvalidArgument("q must be >= 1");
}

OptState OptState::For(OptimizerKind kind, Index dim) {
  OptState s;
  switch (kind) {
    case OptimizerKind::kZoSgdMmt:
      s.m = Vector::Zero(dim);
      break;
    case OptimizerKind::kZoAdam:
    case OptimizerKind::kFoAdam:
      s.m = Vector::Zero(dim);
      s.v = Vector::Zero(dim);
      s.v_cap = Vector::Zero(dim);
      break;
    default:
      break;
  }
  return s;
}

namespace {

void CheckEstimate(const GradEstimate& estimate, const ParamVector& params) {
  if (estimate.is_dense()) {
    if (estimate.dense().size() != params.dim()) {
      throw DimensionMismatch(
          "estimate has dimension " + std::to_string(estimate.dense().size()) +
          ", parameters " + std::to_string(params.dim()));
    }
    if (!estimate.dense().allFinite()) {
      throw NonFiniteUpdate("gradient estimate has non-finite entries");
    }
    return;
  }
  for (const auto& term : estimate.implicit().terms) {
    if (!std::isfinite(term.coeff)) {
      throw NonFiniteUpdate("gradient estimate has a non-finite coefficient");
    }
  }
}

std::span<double> Slice(Vector& v, const Layer& layer) {
  return {v.data() + layer.offset, static_cast<std::size_t>(layer.length)};
}

// Replaces every slope with sign(slope) / q.
GradEstimate SignOfSlopes(const GradEstimate& estimate, int q) {
  if (estimate.is_dense()) {
    throw InvalidArgument(
        "slope-sign ZO-SGD-Sign needs an implicit (seed) estimate");
  }
  auto imp = estimate.implicit();
  for (auto& term : imp.terms) term.coeff = Sign(term.coeff) / q;
  return GradEstimate::FromTerms(imp.stream, std::move(imp.terms),
                                 std::move(imp.mask));
}

}  // namespace

void ApplyUpdate(OptimizerKind kind, OptState& state, ParamVector& params,
                 const GradEstimate& estimate, const HyperParams& hp) {
  if (kind == OptimizerKind::kZoSgdCons) {
    throw InvalidArgument("ZO-SGD-Cons is applied with StepCons");
  }
  hp.Validate();
  CheckEstimate(estimate, params);
  const LayerPartition& partition = params.partition();
  const double lr = hp.lr;

  if (kind == OptimizerKind::kZoSgdSign &&
      hp.sign_mode == SignMode::kSlopeTimesDirection) {
    const GradEstimate signed_estimate = SignOfSlopes(estimate, hp.q);
    signed_estimate.ForEachLayer(
        partition, [&](std::size_t l, std::span<const double> g) {
          auto x = params.layer(l);
          for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr * g[i];
        });
    ++state.step;
    if (!params.all_finite()) throw NonFiniteUpdate("update produced non-finite parameters");
    return;
  }

  estimate.ForEachLayer(partition, [&](std::size_t l,
                                       std::span<const double> g) {
    auto x = params.layer(l);
    switch (kind) {
      case OptimizerKind::kZoSgd:
      case OptimizerKind::kFoSgd:
      case OptimizerKind::kForwardGrad:
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr * g[i];
        break;
      case OptimizerKind::kZoSgdSign:
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr * Sign(g[i]);
        break;
      case OptimizerKind::kZoSgdMmt: {
        auto m = Slice(*state.m, partition[l]);
        for (std::size_t i = 0; i < x.size(); ++i) {
          m[i] = hp.beta1 * m[i] + g[i];
          x[i] -= lr * m[i];
        }
        break;
      }
      case OptimizerKind::kZoAdam:
      case OptimizerKind::kFoAdam: {
        // No bias correction; the second moment is capped by its running
        // maximum (AMSGrad).
        auto m = Slice(*state.m, partition[l]);
        auto v = Slice(*state.v, partition[l]);
        auto v_cap = Slice(*state.v_cap, partition[l]);
        for (std::size_t i = 0; i < x.size(); ++i) {
          m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
          v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
          v_cap[i] = std::max(v_cap[i], v[i]);
          x[i] -= lr * m[i] / (std::sqrt(v_cap[i]) + hp.eps);
        }
        break;
      }
      case OptimizerKind::kZoSgdCons:
        break;
    }
  });
  ++state.step;
  if (!params.all_finite()) {
    throw NonFiniteUpdate("update produced non-finite parameters");
  }
}

ConsOutcome StepCons(const Objective& objective, OptState& state,
                     ParamVector& params, const GradEstimate& estimate,
                     const HyperParams& hp, const BatchKey& batch,
                     std::optional<double> f_current) {
  hp.Validate();
  CheckEstimate(estimate, params);
  // Candidates are formed from an exact snapshot so the kept point is
  // bitwise the one that was evaluated.
  ScratchCharge charge(3 * params.dim());
  const Vector x0 = params.values();
  const Vector step = hp.lr * Materialize(estimate, params.partition());

  const double f0 =
      f_current ? *f_current : objective.Eval(params.values(), batch);
  params.values() = x0 - step;
  const double f_minus = objective.Eval(params.values(), batch);
  params.values() = x0 + step;
  const double f_plus = objective.Eval(params.values(), batch);

  if (!std::isfinite(f0) || !std::isfinite(f_minus) || !std::isfinite(f_plus)) {
    params.values() = x0;
    throw NonFiniteLoss("non-finite loss in conservative step");
  }

  ConsOutcome out;
  out.f_current = f0;
  if (f0 <= f_minus && f0 <= f_plus) {
    out.choice = ConsChoice::kStay;
    out.f_chosen = f0;
    params.values() = x0;
  } else if (f_minus <= f_plus) {
    out.choice = ConsChoice::kMinus;
    out.f_chosen = f_minus;
    params.values() = x0 - step;
  } else {
    out.choice = ConsChoice::kPlus;
    out.f_chosen = f_plus;
  }
  ++state.step;
  return out;
}

}  // namespace zoopt
