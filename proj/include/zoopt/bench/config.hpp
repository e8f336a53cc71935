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

#ifndef ZOOPT_BENCH_CONFIG_HPP_
#define ZOOPT_BENCH_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zoopt/core.hpp"
#include "zoopt/trainer.hpp"

namespace zoopt {

// Flat "key = value" text with dotted section names and '#' comments.
// Keys starting with "grid." list comma-separated values for one axis;
// the rest of the key names the setting it overrides.
struct ConfigFile {
  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<std::string>> grid;
  // Directory relative paths in the file resolve against.
  std::string base_dir = ".";

  static ConfigFile Parse(const std::string& text,
                          const std::string& base_dir = ".");
  static ConfigFile Load(const std::string& path);
};

struct TaskSpec {
  std::string kind = "quadratic";  // quadratic | logistic | mlp | lora_mlp
  // quadratic
  Index dim = 10;
  double kappa = 10.0;
  std::size_t layers = 1;
  std::string rotation = "global";
  std::uint64_t seed = 0;
  // classification data: "synth" or a file path
  std::string data = "synth";
  std::string format = "csv";
  Index n = 2000;
  Index features = 20;
  int classes = 2;
  double margin = 2.0;
  double test_fraction = 0.2;
  Index batch_size = 32;
  double l2 = 0.0;
  std::vector<Index> hidden = {16, 16, 16};
  Index rank = 2;
  std::uint64_t base_seed = 0;
  std::uint64_t base_steps = 0;
  double base_lr = 0.1;
};

struct RunConfig {
  std::string name;
  TaskSpec task;
  TrainOptions train;
  // Block-wise RGE over this many contiguous layer groups, resolved against
  // the task's layer count when the run starts.
  std::optional<std::size_t> block_count;
  // Every setting after defaults, as canonical text; used for reports and
  // tie-breaking.
  std::map<std::string, std::string> settings;
  // The grid assignments that produced this run (empty for plain runs).
  std::map<std::string, std::string> overrides;

  std::string Canonical() const;
};

// Builds one run from plain settings. Unknown keys throw ConfigError.
RunConfig MakeRunConfig(const std::map<std::string, std::string>& values,
                        const std::string& base_dir = ".");

// Cartesian product of the grid axes (axes in key order, values in listed
// order). A file without grid keys yields one run.
std::vector<RunConfig> ExpandGrid(const ConfigFile& file);

std::unique_ptr<Objective> BuildTask(const TaskSpec& spec);

}  // namespace zoopt

#endif  // ZOOPT_BENCH_CONFIG_HPP_
