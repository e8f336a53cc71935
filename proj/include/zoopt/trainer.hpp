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

#ifndef ZOOPT_TRAINER_HPP_
#define ZOOPT_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zoopt/core.hpp"
#include "zoopt/estimators.hpp"
#include "zoopt/hybrid.hpp"
#include "zoopt/optimizers.hpp"

namespace zoopt {

struct TrainOptions {
  OptimizerKind kind = OptimizerKind::kZoSgd;
  HyperParams hp;
  Representation representation = Representation::kDense;
  std::optional<SparsityConfig> sparsity;
  std::optional<BlockPartition> blocks;
  // When set, every step is a hybrid step and `kind` is ignored.
  std::optional<HybridConfig> hybrid;
  std::uint64_t iterations = 0;
  // Metrics are recorded at step 0, every eval_every steps and at the end.
  // 0 records only the first and last rows.
  std::uint64_t eval_every = 0;
  // Seeds the initial point and the perturbation directions.
  std::uint64_t master_seed = 0;
  // Seeds mini-batch selection.
  std::uint64_t dataset_seed = 0;

  // Called after every completed step with the new parameters.
  std::function<void(std::uint64_t step, const ParamVector&)> on_step;
  std::function<void(std::uint64_t step, const ConsOutcome&)> on_cons;
};

struct TrajectoryRow {
  std::uint64_t step = 0;
  double train_loss = 0.0;
  double test_metric = 0.0;
  std::uint64_t cumulative_queries = 0;
  double wall_ms = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  QueryCounts queries;
  std::uint64_t steps_completed = 0;
  bool failed = false;
  std::string error;
  Vector final_params;
  // Conservative steps whose chosen loss exceeded the current loss.
  std::uint64_t cons_violations = 0;
};

// Runs the optimizer from `start` (or the objective's initial point for
// master_seed). Oracle errors end the run early with failed = true.
Trajectory Train(const Objective& objective, const TrainOptions& options,
                 std::optional<Vector> start = std::nullopt);

}  // namespace zoopt

#endif  // ZOOPT_TRAINER_HPP_
