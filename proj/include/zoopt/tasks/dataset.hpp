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

#ifndef ZOOPT_TASKS_DATASET_HPP_
#define ZOOPT_TASKS_DATASET_HPP_

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "zoopt/core.hpp"

namespace zoopt {

struct Dataset {
  Matrix features;          // n x d, one example per row
  std::vector<int> labels;  // in [0, num_classes)
  int num_classes = 0;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  Dataset Rows(const std::vector<Index>& rows) const;
};

enum class DatasetFormat { kCsv, kSvmlight };

DatasetFormat ParseDatasetFormat(std::string_view name);

// CSV: header row naming the columns, one of which is "label".
// svmlight: "<label> <index>:<value> ..." with 1-based indices; '#' starts a
// comment. Labels are non-negative integers, or -1/+1 for binary data (mapped
// to 0/1).
Dataset LoadDataset(const std::string& path, DatasetFormat format);
Dataset ReadCsv(std::istream& in);
Dataset ReadSvmlight(std::istream& in, Index dim = 0);

// Gaussian blobs: class c is centered at margin * v_c for a random unit
// vector v_c, with isotropic noise of standard deviation 0.5.
Dataset SynthClassification(Index n, Index dim, int classes, double margin,
                            std::uint64_t seed);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

TrainTestSplit SplitDataset(const Dataset& data, double test_fraction,
                            std::uint64_t seed);

// Indices of the mini-batch for `step`: each epoch is a fresh permutation
// of 0..n-1 drawn from (dataset_seed, epoch), cut into consecutive batches.
// Returned sorted. batch_size >= n yields every index.
std::vector<Index> BatchIndices(Index n, Index batch_size,
                                std::uint64_t dataset_seed,
                                std::uint64_t step);

}  // namespace zoopt

#endif  // ZOOPT_TASKS_DATASET_HPP_
