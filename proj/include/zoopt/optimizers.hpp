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

// Update rules of the unified descent framework
//   x_{t+1} = x_t - lr * h(g_hat)
// where h post-processes the gradient surrogate per optimizer kind.

#ifndef ZOOPT_OPTIMIZERS_HPP_
#define ZOOPT_OPTIMIZERS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "zoopt/core.hpp"
#include "zoopt/estimators.hpp"

namespace zoopt {

enum class OptimizerKind {
  kZoSgd,
  kZoSgdSign,
  kZoSgdMmt,
  kZoSgdCons,
  kZoAdam,
  kForwardGrad,
  kFoSgd,
  kFoAdam,
};

std::string_view ToString(OptimizerKind kind);
OptimizerKind ParseOptimizerKind(std::string_view name);

bool IsZerothOrder(OptimizerKind kind);
bool IsFirstOrder(OptimizerKind kind);

// How ZO-SGD-Sign post-processes the estimate.
enum class SignMode {
  // sign(g_hat) coordinate by coordinate.
  kElementwise,
  // (1/q) sum_i sign(c_i) u_i: the sign of each directional slope times its
  // direction. Needs an implicit estimate.
  kSlopeTimesDirection,
};

struct HyperParams {
  double lr = 1e-3;
  // Momentum factor for ZO-SGD-MMT and first-moment factor for Adam.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double mu = 1e-3;
  int q = 1;
  SignMode sign_mode = SignMode::kElementwise;

  void Validate() const;
};

struct OptState {
  std::uint64_t step = 0;
  std::optional<Vector> m;
  std::optional<Vector> v;
  std::optional<Vector> v_cap;

  // Buffers exist iff the kind needs them.
  static OptState For(OptimizerKind kind, Index dim);
};

// params <- params - lr * h(g_hat). Dense estimates update the buffer
// directly; implicit ones are regenerated layer by layer. Not valid for
// ZO-SGD-Cons, which needs extra evaluations (see StepCons).
void ApplyUpdate(OptimizerKind kind, OptState& state, ParamVector& params,
                 const GradEstimate& estimate, const HyperParams& hp);

enum class ConsChoice { kStay, kMinus, kPlus };

struct ConsOutcome {
  ConsChoice choice = ConsChoice::kStay;
  double f_current = 0.0;
  double f_chosen = 0.0;
};

// Conservative step: evaluates f at x, x - lr g_hat and x + lr g_hat on the
// same batch and keeps the smallest (ties: stay, then minus, then plus).
// f(x) is evaluated here unless `f_current` is supplied.
ConsOutcome StepCons(const Objective& objective, OptState& state,
                     ParamVector& params, const GradEstimate& estimate,
                     const HyperParams& hp, const BatchKey& batch,
                     std::optional<double> f_current = std::nullopt);

}  // namespace zoopt

#endif  // ZOOPT_OPTIMIZERS_HPP_
