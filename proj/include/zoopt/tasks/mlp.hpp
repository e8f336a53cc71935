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

#ifndef ZOOPT_TASKS_MLP_HPP_
#define ZOOPT_TASKS_MLP_HPP_

#include <cstdint>
#include <vector>

#include "zoopt/core.hpp"
#include "zoopt/tasks/dataset.hpp"

namespace zoopt {

// Fully connected classifier with tanh hidden units and softmax
// cross-entropy. Layer l ("fc<l>") holds W_l (out x in, column-major)
// followed by b_l. Test metric: accuracy on the held-out split.
class MlpTask : public Objective {
 public:
  // widths = {input, hidden..., classes}.
  MlpTask(Dataset train, Dataset test, std::vector<Index> widths,
          Index batch_size);

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
  // W_l ~ N(0, 1/in_l), b_l = 0.
  Vector InitialPoint(std::uint64_t seed) const override;
  std::vector<double> ActivationElemsPerExample() const override;
  std::size_t batch_size() const override {
    return static_cast<std::size_t>(batch_size_);
  }

  const std::vector<Index>& widths() const { return widths_; }
  std::size_t n_layers() const { return widths_.size() - 1; }
  const Dataset& train() const { return train_; }
  const Dataset& test() const { return test_; }
  std::vector<Index> BatchRows(const BatchKey& batch) const;

  template <typename T>
  T Loss(const Eigen::Matrix<T, Eigen::Dynamic, 1>& x, const Matrix& features,
         const std::vector<int>& labels) const;

  // Gradient of the batch loss for layers k..n-1, computed by
  // back-propagation that stops at layer k; layers below k stay zero.
  Vector Backprop(const Vector& x, std::size_t k, const Matrix& features,
                  const std::vector<int>& labels) const;

  double Accuracy(const Vector& x, const Dataset& data) const;

 private:
  Dataset train_;
  Dataset test_;
  std::vector<Index> widths_;
  Index batch_size_;
  LayerPartition partition_;
};

// Low-rank adaptation of a frozen MlpTask: layer l uses W_l + B_l A_l with
// trainable B_l (out x r) and A_l (r x in). Layer "lora<l>" holds B_l then A_l,
// both column-major. Biases stay frozen.
class LoraMlpTask : public Objective {
 public:
  LoraMlpTask(MlpTask base, Vector base_params, Index rank,
              double a_init_std = 0.1);

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
  // B = 0, A ~ N(0, a_init_std^2).
  Vector InitialPoint(std::uint64_t seed) const override;
  std::vector<double> ActivationElemsPerExample() const override;
  std::size_t batch_size() const override { return base_.batch_size(); }

  const MlpTask& base() const { return base_; }
  const Vector& base_params() const { return base_params_; }
  Index rank() const { return rank_; }

  // Base parameter vector with W_l replaced by W_l + B_l A_l.
  template <typename T>
  Eigen::Matrix<T, Eigen::Dynamic, 1> Effective(
      const Eigen::Matrix<T, Eigen::Dynamic, 1>& x) const;

 private:
  MlpTask base_;
  Vector base_params_;
  Index rank_;
  double a_init_std_;
  LayerPartition partition_;
};

}  // namespace zoopt

#endif  // ZOOPT_TASKS_MLP_HPP_
