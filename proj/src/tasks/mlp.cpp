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

#include "zoopt/tasks/mlp.hpp"

#include <cmath>
#include <string>

#include "zoopt/dual.hpp"

namespace zoopt {

namespace {

template <typename T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

void CheckDim(const Vector& v, Index dim, const char* what) {
  if (v.size() != dim) {
    throw DimensionMismatch(std::string(what) + " has dimension " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(dim));
  }
}

LayerPartition MlpPartition(const std::vector<Index>& widths,
                            const char* prefix, Index rank) {
  std::vector<std::pair<std::string, Index>> lengths;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Index in = widths[l];
    const Index out = widths[l + 1];
    lengths.emplace_back(prefix + std::to_string(l),
                         rank > 0 ? rank * (out + in) : out * in + out);
  }
  return LayerPartition::FromLengths(lengths);
}

// Row-wise softmax cross-entropy, averaged over rows.
template <typename T>
T CrossEntropy(const MatT<T>& logits, const std::vector<int>& labels) {
  using std::exp;
  using std::log;
  T total(0.0);
  for (Index i = 0; i < logits.rows(); ++i) {
    T m = logits(i, 0);
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > m) m = logits(i, c);
    }
    T s(0.0);
    for (Index c = 0; c < logits.cols(); ++c) s += exp(logits(i, c) - m);
    total += m + log(s) - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

}  // namespace

MlpTask::MlpTask(Dataset train, Dataset test, std::vector<Index> widths,
                 Index batch_size)
    : train_(std::move(train)), test_(std::move(test)),
      widths_(std::move(widths)), batch_size_(batch_size) {
  if (widths_.size() < 2) {
    throw InvalidArgument("an MLP needs input and output widths");
  }
  for (Index w : widths_) {
    if (w < 1) throw InvalidArgument("layer widths must be >= 1");
  }
  if (widths_.front() != train_.dim() || train_.dim() != test_.dim()) {
    throw DimensionMismatch("MLP input width does not match the features");
  }
  if (widths_.back() < train_.num_classes) {
    throw LabelDomainError("MLP has fewer outputs than classes");
  }
  if (batch_size_ < 1) throw InvalidArgument("batch size must be >= 1");
  partition_ = MlpPartition(widths_, "fc", 0);
}

std::vector<Index> MlpTask::BatchRows(const BatchKey& batch) const {
  return BatchIndices(train_.size(), batch_size_, batch.dataset_seed,
                      batch.step);
}

template <typename T>
T MlpTask::Loss(const VecT<T>& x, const Matrix& features,
                const std::vector<int>& labels) const {
  const std::size_t n = n_layers();
  MatT<T> h = features.template cast<T>();
  for (std::size_t l = 0; l < n; ++l) {
    const Index in = widths_[l];
    const Index out = widths_[l + 1];
    const Index off = partition_[l].offset;
    Eigen::Map<const MatT<T>> w(x.data() + off, out, in);
    Eigen::Map<const VecT<T>> b(x.data() + off + out * in, out);
    MatT<T> z = h * w.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 < n) {
      h = z.unaryExpr([](const T& v) {
        using std::tanh;
        return T(tanh(v));
      });
    } else {
      h = std::move(z);
    }
  }
  return CrossEntropy<T>(h, labels);
}

template double MlpTask::Loss<double>(const Vector&, const Matrix&,
                                      const std::vector<int>&) const;
template Dual<double> MlpTask::Loss<Dual<double>>(
    const VecT<Dual<double>>&, const Matrix&, const std::vector<int>&) const;

Vector MlpTask::Backprop(const Vector& x, std::size_t k,
                         const Matrix& features,
                         const std::vector<int>& labels) const {
  const std::size_t n = n_layers();
  if (k > n) throw InvalidArgument("layer index exceeds the layer count");
  CheckDim(x, dim(), "point");
  Vector g = Vector::Zero(dim());
  if (k == n) return g;

  std::vector<Matrix> inputs(n);
  Matrix h = features;
  for (std::size_t l = 0; l < n; ++l) {
    const Index in = widths_[l];
    const Index out = widths_[l + 1];
    const Index off = partition_[l].offset;
    Eigen::Map<const Matrix> w(x.data() + off, out, in);
    Eigen::Map<const Vector> b(x.data() + off + out * in, out);
    inputs[l] = h;
    Matrix z = h * w.transpose();
    z.rowwise() += b.transpose();
    h = l + 1 < n ? Matrix(z.array().tanh()) : z;
  }

  // d loss / d logits = (softmax - onehot) / rows.
  const Index rows = h.rows();
  Matrix dz(rows, h.cols());
  for (Index i = 0; i < rows; ++i) {
    const double m = h.row(i).maxCoeff();
    dz.row(i) = (h.row(i).array() - m).exp().matrix();
    dz.row(i) /= dz.row(i).sum();
    dz(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  dz /= static_cast<double>(rows);

  for (std::size_t l = n; l-- > k;) {
    const Index in = widths_[l];
    const Index out = widths_[l + 1];
    const Index off = partition_[l].offset;
    Eigen::Map<const Matrix> w(x.data() + off, out, in);
    Eigen::Map<Matrix> gw(g.data() + off, out, in);
    Eigen::Map<Vector> gb(g.data() + off + out * in, out);
    gw = dz.transpose() * inputs[l];
    gb = dz.colwise().sum().transpose();
    if (l > k) {
      const Matrix dh = dz * w;
      dz = (dh.array() * (1.0 - inputs[l].array().square())).matrix();
    }
  }
  return g;
}

double MlpTask::Eval(const Vector& x, const BatchKey& batch) const {
  CheckDim(x, dim(), "point");
  const Dataset b = train_.Rows(BatchRows(batch));
  return Loss<double>(x, b.features, b.labels);
}

Vector MlpTask::Grad(const Vector& x, const BatchKey& batch) const {
  return PartialGradFromLayer(x, 0, batch);
}

Vector MlpTask::PartialGradFromLayer(const Vector& x, std::size_t k,
                                     const BatchKey& batch) const {
  const Dataset b = train_.Rows(BatchRows(batch));
  return Backprop(x, k, b.features, b.labels);
}

double MlpTask::Jvp(const Vector& x, const Vector& u,
                    const BatchKey& batch) const {
  CheckDim(x, dim(), "point");
  CheckDim(u, dim(), "direction");
  using D = Dual<double>;
  VecT<D> xd(dim());
  for (Index i = 0; i < dim(); ++i) xd(i) = D(x(i), u(i));
  const Dataset b = train_.Rows(BatchRows(batch));
  return Loss<D>(xd, b.features, b.labels).der;
}

double MlpTask::Accuracy(const Vector& x, const Dataset& data) const {
  CheckDim(x, dim(), "point");
  const std::size_t n = n_layers();
  Matrix h = data.features;
  for (std::size_t l = 0; l < n; ++l) {
    const Index in = widths_[l];
    const Index out = widths_[l + 1];
    const Index off = partition_[l].offset;
    Eigen::Map<const Matrix> w(x.data() + off, out, in);
    Eigen::Map<const Vector> b(x.data() + off + out * in, out);
    Matrix z = h * w.transpose();
    z.rowwise() += b.transpose();
    h = l + 1 < n ? Matrix(z.array().tanh()) : z;
  }
  Index correct = 0;
  for (Index i = 0; i < h.rows(); ++i) {
    Index pred = 0;
    h.row(i).maxCoeff(&pred);
    if (pred == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

EvalMetrics MlpTask::Metrics(const Vector& x) const {
  return {Loss<double>(x, train_.features, train_.labels),
          Accuracy(x, test_)};
}

Vector MlpTask::InitialPoint(std::uint64_t seed) const {
  Vector x = Vector::Zero(dim());
  const SeedStream stream(seed);
  for (std::size_t l = 0; l < n_layers(); ++l) {
    const Index in = widths_[l];
    const Index out = widths_[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    CounterRng rng(stream.Derive(0, 0, l, StreamPurpose::kInit));
    auto w = x.segment(partition_[l].offset, out * in);
    for (Index i = 0; i < w.size(); ++i) w(i) = scale * rng.NextGaussian();
  }
  return x;
}

std::vector<double> MlpTask::ActivationElemsPerExample() const {
  std::vector<double> out;
  for (std::size_t l = 0; l < n_layers(); ++l) {
    out.push_back(static_cast<double>(widths_[l] + widths_[l + 1]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LoRA

LoraMlpTask::LoraMlpTask(MlpTask base, Vector base_params, Index rank,
                         double a_init_std)
    : base_(std::move(base)), base_params_(std::move(base_params)),
      rank_(rank), a_init_std_(a_init_std) {
  CheckDim(base_params_, base_.dim(), "base parameters");
  if (rank_ < 1) throw InvalidArgument("LoRA rank must be >= 1");
  if (!(a_init_std_ >= 0.0)) {
    throw InvalidArgument("LoRA init scale must be >= 0");
  }
  partition_ = MlpPartition(base_.widths(), "lora", rank_);
}

template <typename T>
VecT<T> LoraMlpTask::Effective(const VecT<T>& x) const {
  VecT<T> full = base_params_.template cast<T>();
  const auto& widths = base_.widths();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Index in = widths[l];
    const Index out = widths[l + 1];
    const Index off = partition_[l].offset;
    Eigen::Map<const MatT<T>> b(x.data() + off, out, rank_);
    Eigen::Map<const MatT<T>> a(x.data() + off + out * rank_, rank_, in);
    Eigen::Map<MatT<T>> w(full.data() + base_.partition()[l].offset, out, in);
    w += b * a;
  }
  return full;
}

template Vector LoraMlpTask::Effective<double>(const Vector&) const;
template VecT<Dual<double>> LoraMlpTask::Effective<Dual<double>>(
    const VecT<Dual<double>>&) const;

double LoraMlpTask::Eval(const Vector& x, const BatchKey& batch) const {
  CheckDim(x, dim(), "point");
  return base_.Eval(Effective<double>(x), batch);
}

Vector LoraMlpTask::Grad(const Vector& x, const BatchKey& batch) const {
  return PartialGradFromLayer(x, 0, batch);
}

Vector LoraMlpTask::PartialGradFromLayer(const Vector& x, std::size_t k,
                                         const BatchKey& batch) const {
  CheckDim(x, dim(), "point");
  const Vector dfull =
      base_.PartialGradFromLayer(Effective<double>(x), k, batch);
  Vector g = Vector::Zero(dim());
  const auto& widths = base_.widths();
  for (std::size_t l = k; l + 1 < widths.size(); ++l) {
    const Index in = widths[l];
    const Index out = widths[l + 1];
    const Index off = partition_[l].offset;
    Eigen::Map<const Matrix> b(x.data() + off, out, rank_);
    Eigen::Map<const Matrix> a(x.data() + off + out * rank_, rank_, in);
    Eigen::Map<const Matrix> dw(dfull.data() + base_.partition()[l].offset,
                                out, in);
    Eigen::Map<Matrix> gb(g.data() + off, out, rank_);
    Eigen::Map<Matrix> ga(g.data() + off + out * rank_, rank_, in);
    gb = dw * a.transpose();
    ga = b.transpose() * dw;
  }
  return g;
}

double LoraMlpTask::Jvp(const Vector& x, const Vector& u,
                        const BatchKey& batch) const {
  CheckDim(x, dim(), "point");
  CheckDim(u, dim(), "direction");
  using D = Dual<double>;
  VecT<D> xd(dim());
  for (Index i = 0; i < dim(); ++i) xd(i) = D(x(i), u(i));
  const Dataset b = base_.train().Rows(base_.BatchRows(batch));
  return base_.Loss<D>(Effective<D>(xd), b.features, b.labels).der;
}

EvalMetrics LoraMlpTask::Metrics(const Vector& x) const {
  return base_.Metrics(Effective<double>(x));
}

Vector LoraMlpTask::InitialPoint(std::uint64_t seed) const {
  Vector x = Vector::Zero(dim());
  const SeedStream stream(seed);
  const auto& widths = base_.widths();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Index in = widths[l];
    const Index out = widths[l + 1];
    CounterRng rng(stream.Derive(1, 0, l, StreamPurpose::kInit));
    auto a = x.segment(partition_[l].offset + out * rank_, rank_ * in);
    for (Index i = 0; i < a.size(); ++i) a(i) = a_init_std_ * rng.NextGaussian();
  }
  return x;
}

std::vector<double> LoraMlpTask::ActivationElemsPerExample() const {
  return base_.ActivationElemsPerExample();
}

}  // namespace zoopt
