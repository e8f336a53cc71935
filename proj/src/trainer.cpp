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

#include "zoopt/trainer.hpp"

#include <chrono>
#include <cmath>

namespace zoopt {

namespace {

void CheckCapabilities(const Objective& objective, const TrainOptions& o) {
  const Capabilities caps = objective.capabilities();
  if (o.hybrid) {
    o.hybrid->Validate(objective.partition().size());
    return;
  }
  if (o.kind == OptimizerKind::kForwardGrad && !caps.jvp) {
    throw CapabilityMissing("forward gradient needs a jvp oracle");
  }
  if (IsFirstOrder(o.kind) && !caps.grad) {
    throw CapabilityMissing("first-order training needs a gradient oracle");
  }
  if ((o.sparsity || o.blocks) && !IsZerothOrder(o.kind)) {
    throw InvalidArgument(
        "sparse and block-wise perturbations apply to ZO optimizers only");
  }
}

}  // namespace

Trajectory Train(const Objective& objective, const TrainOptions& options,
                 std::optional<Vector> start) {
  options.hp.Validate();
  CheckCapabilities(objective, options);

  CountingObjective counted(objective);
  ParamVector params =
      start ? ParamVector(std::move(*start), objective.partition())
            : MakeParams(objective, options.master_seed);
  OptState state = OptState::For(options.kind, params.dim());
  const SeedStream stream(options.master_seed);

  RgeConfig rge;
  rge.mu = options.hp.mu;
  rge.q = options.hp.q;
  rge.representation = options.representation;
  rge.sparsity = options.sparsity;
  rge.blocks = options.blocks;
  rge.Validate();

  std::vector<double> fixed_ratios;
  if (options.sparsity && !options.sparsity->recompute_ratios) {
    fixed_ratios =
        SparsityRatiosByMagnitude(params, options.sparsity->global_ratio);
  }

  Trajectory out;
  const auto t0 = std::chrono::steady_clock::now();
  auto record = [&](std::uint64_t step) {
    const EvalMetrics m = objective.Metrics(params.values());
    TrajectoryRow row;
    row.step = step;
    row.train_loss = m.train_loss;
    row.test_metric = m.test_metric;
    row.cumulative_queries = counted.counts().total();
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.rows.push_back(row);
  };

  record(0);
  try {
    for (std::uint64_t t = 0; t < options.iterations; ++t) {
      const BatchKey batch{options.dataset_seed, t};
      if (options.hybrid) {
        HybridStep(counted, params, *options.hybrid, stream, t, batch);
      } else if (IsFirstOrder(options.kind)) {
        const GradEstimate g =
            GradEstimate::Dense(counted.Grad(params.values(), batch));
        ApplyUpdate(options.kind, state, params, g, options.hp);
      } else if (options.kind == OptimizerKind::kForwardGrad) {
        const GradEstimate g =
            ForwardGradEstimate(counted, params, options.hp.q, stream, t,
                                batch, options.representation);
        ApplyUpdate(options.kind, state, params, g, options.hp);
      } else {
        std::optional<MaskSpec> mask;
        if (options.sparsity) {
          std::vector<double> ratios =
              options.sparsity->recompute_ratios
                  ? SparsityRatiosByMagnitude(params,
                                              options.sparsity->global_ratio)
                  : fixed_ratios;
          mask = SampleSparseMask(stream, options.sparsity->resample ? t : 0,
                                  params.partition(), std::move(ratios));
        }
        const GradEstimate g = RgeEstimate(counted, params, rge, stream, t,
                                           batch, mask ? &*mask : nullptr);
        if (options.kind == OptimizerKind::kZoSgdCons) {
          const ConsOutcome c =
              StepCons(counted, state, params, g, options.hp, batch);
          if (c.f_chosen > c.f_current) ++out.cons_violations;
          if (options.on_cons) options.on_cons(t, c);
        } else {
          ApplyUpdate(options.kind, state, params, g, options.hp);
        }
      }
      out.steps_completed = t + 1;
      if (options.on_step) options.on_step(t + 1, params);
      const bool last = t + 1 == options.iterations;
      if (last || (options.eval_every > 0 &&
                   (t + 1) % options.eval_every == 0)) {
        record(t + 1);
      }
    }
  } catch (const Error& e) {
    out.failed = true;
    out.error = e.what();
  }
  if (!out.failed && !out.rows.empty() &&
      !std::isfinite(out.rows.back().train_loss)) {
    out.failed = true;
    out.error = "final loss is not finite";
  }
  out.queries = counted.counts();
  out.final_params = params.values();
  return out;
}

}  // namespace zoopt
