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

#include "zoopt/bench/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "zoopt/memcost.hpp"

namespace zoopt {

RunRecord ExecuteRun(const RunConfig& config) {
  std::unique_ptr<Objective> objective = BuildTask(config.task);
  TrainOptions options = config.train;
  if (config.block_count) {
    try {
      options.blocks = BlockPartition::Contiguous(
          objective->partition().size(), *config.block_count);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("blocks.count: ") + e.what());
    }
  }
  if (options.hybrid) {
    try {
      options.hybrid->Validate(objective->partition().size());
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("hybrid.k: ") + e.what());
    }
  }

  RunRecord record;
  record.name = config.name;
  record.settings = config.settings;
  record.overrides = config.overrides;

  Trajectory traj;
  try {
    traj = Train(*objective, options);
  } catch (const CapabilityMissing& e) {
    throw ConfigError(e.what());
  }
  record.rows = traj.rows;

  RunSummary& s = record.summary;
  s.failed = traj.failed;
  s.error = traj.error;
  s.higher_is_better = objective->metric_higher_is_better();
  s.queries = traj.queries;
  if (!traj.rows.empty()) {
    s.final_train_loss = traj.rows.back().train_loss;
    s.final_test_metric = traj.rows.back().test_metric;
    s.best_test_metric = traj.rows.front().test_metric;
    for (const auto& row : traj.rows) {
      const bool better = s.higher_is_better
                              ? row.test_metric > s.best_test_metric
                              : row.test_metric < s.best_test_metric;
      if (better) s.best_test_metric = row.test_metric;
    }
  }
  const ArchSpec arch = ArchFromObjective(*objective, config.task.kind);
  const double batch = arch.nominal_batch;
  if (options.hybrid) {
    s.modeled_peak_bytes = HybridMemoryNote(arch, options.hybrid->k, batch, 1.0);
  } else {
    s.modeled_peak_bytes =
        PeakMemoryFt(arch, MemoryKindFor(options.kind, options.representation),
                     PrecisionMode::kFull, batch, 1.0)
            .peak_bytes;
  }
  return record;
}

std::vector<RunRecord> ExecuteAll(const std::vector<RunConfig>& configs,
                                  std::size_t workers) {
  std::vector<RunRecord> records(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        records[i] = ExecuteRun(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, configs.size()));
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

std::optional<std::size_t> SelectBest(const std::vector<RunRecord>& records) {
  std::optional<std::size_t> best;
  auto canonical = [](const RunRecord& r) {
    std::string out;
    for (const auto& [k, v] : r.settings) out += k + "=" + v + "\n";
    return out;
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RunSummary& s = records[i].summary;
    if (s.failed || !std::isfinite(s.final_test_metric)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const RunSummary& b = records[*best].summary;
    if (s.final_test_metric != b.final_test_metric) {
      const bool better = s.higher_is_better
                              ? s.final_test_metric > b.final_test_metric
                              : s.final_test_metric < b.final_test_metric;
      if (better) best = i;
      continue;
    }
    if (s.queries.total() != b.queries.total()) {
      if (s.queries.total() < b.queries.total()) best = i;
      continue;
    }
    if (canonical(records[i]) < canonical(records[*best])) best = i;
  }
  return best;
}

std::size_t WorkersFromEnv() {
  const char* env = std::getenv("ZOOPT_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) {
    throw ConfigError("ZOOPT_WORKERS must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace zoopt
