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

#ifndef ZOOPT_TASKS_LOGISTIC_HPP_
#define ZOOPT_TASKS_LOGISTIC_HPP_

#include "zoopt/core.hpp"
#include "zoopt/tasks/dataset.hpp"

namespace zoopt {

// Binary logistic regression with mean sigmoid cross-entropy over the batch
// and an l2/2 * ||w||^2 penalty on the weights. Layers: "weight" (d) and
// "bias" (1). Test metric: accuracy on the held-out split.
class LogisticTask : public Objective {
 public:
  LogisticTask(Dataset train, Dataset test, double l2, Index batch_size);

  const LayerPartition& partition() const override { return partition_; }
  Capabilities capabilities() const override { return {true, true, true}; }
  double Eval(const Vector& x, const BatchKey& batch) const override;
  Vector Grad(const Vector& x, const BatchKey& batch) const override;
  double Jvp(const Vector& x, const Vector& u,
             const BatchKey& batch) const override;
  Vector PartialGradFromLayer(const Vector& x, std::size_t k,
                              const BatchKey& batch) const override;
  EvalMetrics Metrics(const Vector& x) const override;
  bool metric_higher_is_better() const override { return true; }
  std::vector<double> ActivationElemsPerExample() const override;
  std::size_t batch_size() const override {
    return static_cast<std::size_t>(batch_size_);
  }

  double Accuracy(const Vector& x, const Dataset& data) const;
  const Dataset& train() const { return train_; }
  const Dataset& test() const { return test_; }

  template <typename T>
  T Loss(const Eigen::Matrix<T, Eigen::Dynamic, 1>& x, const Matrix& features,
         const std::vector<int>& labels) const;

 private:
  Dataset Batch(const BatchKey& batch) const;

  Dataset train_;
  Dataset test_;
  double l2_;
  Index batch_size_;
  LayerPartition partition_;
};

}  // namespace zoopt

#endif  // ZOOPT_TASKS_LOGISTIC_HPP_
