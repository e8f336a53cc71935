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

#include "zoopt/tasks/quadratic.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/QR>

namespace zoopt {

namespace {

void CheckDim(const Vector& v, Index dim, const char* what) {
  if (v.size() != dim) {
    throw DimensionMismatch(std::string(what) + " has dimension " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(dim));
  }
}

Matrix RandomRotation(Index n, const SeedStream& stream, std::uint64_t layer) {
  Matrix g(n, n);
  CounterRng rng(stream.Derive(0, 0, layer, StreamPurpose::kInit));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = rng.NextGaussian();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  // Fix column signs so Q is a deterministic function of g.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

void ZeroLayersBelow(const LayerPartition& partition, std::size_t k,
                     Vector& g) {
  if (k > partition.size()) {
    throw InvalidArgument("layer index " + std::to_string(k) +
                          " exceeds the layer count");
  }
  for (std::size_t l = 0; l < k; ++l) {
    g.segment(partition[l].offset, partition[l].length).setZero();
  }
}

QuadraticTask::QuadraticTask(Matrix a, Vector x_star, LayerPartition partition)
    : a_(std::move(a)), x_star_(std::move(x_star)),
      partition_(std::move(partition)) {
  const Index d = partition_.dim();
  if (a_.rows() != d || a_.cols() != d) {
    throw DimensionMismatch("quadratic matrix does not match the partition");
  }
  CheckDim(x_star_, d, "minimizer");
}

QuadraticTask QuadraticTask::Make(const QuadraticOptions& o) {
  if (o.dim < 1) throw InvalidArgument("quadratic dimension must be >= 1");
  if (!(o.kappa >= 1.0) || !std::isfinite(o.kappa)) {
    throw InvalidArgument("condition number must be >= 1");
  }
  LayerPartition partition = LayerPartition::Even(o.dim, o.n_layers);
  const SeedStream stream(o.seed);
  const Index d = o.dim;

  Vector eig(d);
  for (Index i = 0; i < d; ++i) {
    eig(i) = d == 1 ? 1.0 : std::pow(o.kappa, double(i) / double(d - 1));
  }
  Matrix a = Matrix::Zero(d, d);
  if (o.rotation == Rotation::kGlobal) {
    const Matrix q = RandomRotation(d, stream, 0);
    a = q * eig.asDiagonal() * q.transpose();
  } else {
    // Deal the sorted eigenvalues round-robin so every layer spans the
    // spectrum.
    Vector dealt(d);
    std::vector<Index> fill(partition.size(), 0);
    for (Index i = 0; i < d;) {
      for (std::size_t l = 0; l < partition.size() && i < d; ++l) {
        if (fill[l] < partition[l].length) {
          dealt(partition[l].offset + fill[l]++) = eig(i++);
        }
      }
    }
    for (std::size_t l = 0; l < partition.size(); ++l) {
      const Index off = partition[l].offset;
      const Index len = partition[l].length;
      const Matrix q = RandomRotation(len, stream, l);
      a.block(off, off, len, len) =
          q * dealt.segment(off, len).asDiagonal() * q.transpose();
    }
  }
  a = 0.5 * (a + a.transpose()).eval();

  Vector x_star(d);
  CounterRng rng(stream.Derive(1, 0, 0, StreamPurpose::kInit));
  for (Index i = 0; i < d; ++i) x_star(i) = rng.NextGaussian();
  return QuadraticTask(std::move(a), std::move(x_star), std::move(partition));
}

double QuadraticTask::Eval(const Vector& x, const BatchKey&) const {
  CheckDim(x, dim(), "point");
  const Vector r = x - x_star_;
  return 0.5 * r.dot(a_ * r);
}

Vector QuadraticTask::Grad(const Vector& x, const BatchKey&) const {
  CheckDim(x, dim(), "point");
  return a_ * (x - x_star_);
}

double QuadraticTask::Jvp(const Vector& x, const Vector& u,
                          const BatchKey& batch) const {
  CheckDim(u, dim(), "direction");
  return u.dot(Grad(x, batch));
}

Vector QuadraticTask::PartialGradFromLayer(const Vector& x, std::size_t k,
                                           const BatchKey& batch) const {
  Vector g = Grad(x, batch);
  ZeroLayersBelow(partition_, k, g);
  return g;
}

EvalMetrics QuadraticTask::Metrics(const Vector& x) const {
  const double f = Eval(x, BatchKey{});
  return {f, f};
}

std::vector<double> QuadraticTask::ActivationElemsPerExample() const {
  std::vector<double> out;
  for (const auto& layer : partition_) out.push_back(double(layer.length));
  return out;
}

AffineTask::AffineTask(Vector c, double b, LayerPartition partition)
    : c_(std::move(c)), b_(b), partition_(std::move(partition)) {
  CheckDim(c_, partition_.dim(), "coefficient vector");
}

double AffineTask::Eval(const Vector& x, const BatchKey&) const {
  CheckDim(x, dim(), "point");
  return c_.dot(x) + b_;
}

Vector AffineTask::Grad(const Vector& x, const BatchKey&) const {
  CheckDim(x, dim(), "point");
  return c_;
}

double AffineTask::Jvp(const Vector& x, const Vector& u,
                       const BatchKey&) const {
  CheckDim(x, dim(), "point");
  CheckDim(u, dim(), "direction");
  return c_.dot(u);
}

Vector AffineTask::PartialGradFromLayer(const Vector& x, std::size_t k,
                                        const BatchKey& batch) const {
  Vector g = Grad(x, batch);
  ZeroLayersBelow(partition_, k, g);
  return g;
}

}  // namespace zoopt
