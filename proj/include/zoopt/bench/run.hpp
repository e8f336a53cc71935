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

#ifndef ZOOPT_BENCH_RUN_HPP_
#define ZOOPT_BENCH_RUN_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "zoopt/bench/config.hpp"
#include "zoopt/trainer.hpp"

namespace zoopt {

struct RunSummary {
  bool failed = false;
  std::string error;
  double final_train_loss = 0.0;
  double final_test_metric = 0.0;
  double best_test_metric = 0.0;
  bool higher_is_better = false;
  QueryCounts queries;
  double modeled_peak_bytes = 0.0;
};

struct RunRecord {
  std::string name;
  std::map<std::string, std::string> settings;
  std::map<std::string, std::string> overrides;
  std::vector<TrajectoryRow> rows;
  RunSummary summary;
};

// Builds the task and trains. Task construction errors propagate as
// ConfigError; oracle failures mark the record failed.
RunRecord ExecuteRun(const RunConfig& config);

// Runs every config on up to `workers` threads. Records come back in input
// order regardless of scheduling.
std::vector<RunRecord> ExecuteAll(const std::vector<RunConfig>& configs,
                                  std::size_t workers);

// Best finite run by final test metric, then fewer queries, then canonical
// config text. Empty when every run failed.
std::optional<std::size_t> SelectBest(const std::vector<RunRecord>& records);

// Worker count from the ZOOPT_WORKERS environment variable (default 1).
std::size_t WorkersFromEnv();

}  // namespace zoopt

#endif  // ZOOPT_BENCH_RUN_HPP_
