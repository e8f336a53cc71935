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

#include "zoopt/tasks/logistic.hpp"

#include <cmath>
#include <string>

#include "zoopt/dual.hpp"

namespace zoopt {

namespace {

// log(1 + e^z), stable for large |z|.
template <typename T>
T Softplus(const T& z) {
  using std::exp;
  using std::log1p;
  if (Value(z) > 0.0) return z + log1p(exp(-z));
  return log1p(exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void CheckDim(const Vector& v, Index dim, const char* what) {
  if (v.size() != dim) {
    throw DimensionMismatch(std::string(what) + " has dimension " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(dim));
  }
}

}  // namespace

LogisticTask::LogisticTask(Dataset train, Dataset test, double l2,
                           Index batch_size)
    : train_(std::move(train)), test_(std::move(test)), l2_(l2),
      batch_size_(batch_size),
      partition_(LayerPartition::FromLengths({{"weight", train_.dim()}, {"bias", 1}})) {
  if (train_.num_classes != 2 || test_.num_classes != 2) {
    throw LabelDomainError("logistic regression needs binary labels");
  }
  if (train_.dim() != test_.dim()) {
    throw DimensionMismatch("train and test features differ in width");
  }
  if (train_.size() < 1) throw InvalidArgument("training set is empty");
  if (!(l2 >= 0.0)) throw InvalidArgument("l2 coefficient must be >= 0");
  if (batch_size_ < 1) throw InvalidArgument("batch size must be >= 1");
}

template <typename T>
T LogisticTask::Loss(const Eigen::Matrix<T, Eigen::Dynamic, 1>& x,
                     const Matrix& features,
                     const std::vector<int>& labels) const {
  using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const Index d = features.cols();
  const VecT w = x.head(d);
  const T b = x(d);
  const VecT z = features.template cast<T>() * w;
  T total(0.0);
  for (Index i = 0; i < z.size(); ++i) {
    const T zi = z(i) + b;
    total += Softplus(zi);
    if (labels[static_cast<std::size_t>(i)] == 1) total -= zi;
  }
  T loss = total / static_cast<double>(z.size());
  if (l2_ > 0.0) loss += (0.5 * l2_) * w.squaredNorm();
  return loss;
}

Dataset LogisticTask::Batch(const BatchKey& batch) const {
  return train_.Rows(
      BatchIndices(train_.size(), batch_size_, batch.dataset_seed, batch.step));
}

double LogisticTask::Eval(const Vector& x, const BatchKey& batch) const {
  CheckDim(x, dim(), "point");
  const Dataset b = Batch(batch);
  return Loss<double>(x, b.features, b.labels);
}

Vector LogisticTask::Grad(const Vector& x, const BatchKey& batch) const {
  CheckDim(x, dim(), "point");
  const Dataset b = Batch(batch);
  const Index d = b.dim();
  Vector r = b.features * x.head(d);
  for (Index i = 0; i < r.size(); ++i) {
    r(i) = Sigmoid(r(i) + x(d)) - b.labels[static_cast<std::size_t>(i)];
  }
  r /= static_cast<double>(r.size());
  Vector g(dim());
  g.head(d) = b.features.transpose() * r;
  if (l2_ > 0.0) g.head(d) += l2_ * x.head(d);
  g(d) = r.sum();
  return g;
}

double LogisticTask::Jvp(const Vector& x, const Vector& u,
                         const BatchKey& batch) const {
  CheckDim(x, dim(), "point");
  CheckDim(u, dim(), "direction");
  using D = Dual<double>;
  Eigen::Matrix<D, Eigen::Dynamic, 1> xd(dim());
  for (Index i = 0; i < dim(); ++i) xd(i) = D(x(i), u(i));
  const Dataset b = Batch(batch);
  return Loss<D>(xd, b.features, b.labels).der;
}

Vector LogisticTask::PartialGradFromLayer(const Vector& x, std::size_t k,
                                          const BatchKey& batch) const {
  if (k > partition_.size()) {
    throw InvalidArgument("layer index exceeds the layer count");
  }
  Vector g = Grad(x, batch);
  for (std::size_t l = 0; l < k; ++l) {
    g.segment(partition_[l].offset, partition_[l].length).setZero();
  }
  return g;
}

double LogisticTask::Accuracy(const Vector& x, const Dataset& data) const {
  const Index d = data.dim();
  const Vector z = data.features * x.head(d);
  Index correct = 0;
  for (Index i = 0; i < z.size(); ++i) {
    const int pred = z(i) + x(d) > 0.0 ? 1 : 0;
    if (pred == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

EvalMetrics LogisticTask::Metrics(const Vector& x) const {
  return {Loss<double>(x, train_.features, train_.labels),
          Accuracy(x, test_)};
}

std::vector<double> LogisticTask::ActivationElemsPerExample() const {
  return {static_cast<double>(train_.dim()), 1.0};
}

}  // namespace zoopt
