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

#ifndef ZOOPT_TASKS_QUADRATIC_HPP_
#define ZOOPT_TASKS_QUADRATIC_HPP_

#include <cstdint>

#include "zoopt/core.hpp"

namespace zoopt {

// How the eigenbasis of A is drawn: one random rotation of the whole space,
// or an independent rotation inside each layer (A block-diagonal).
enum class Rotation { kGlobal, kPerLayer };

struct QuadraticOptions {
  Index dim = 10;
  double kappa = 10.0;
  std::uint64_t seed = 0;
  std::size_t n_layers = 1;
  Rotation rotation = Rotation::kGlobal;
};

// f(x) = 1/2 (x - x*)^T A (x - x*) with A symmetric positive definite and
// eigenvalues spaced geometrically from 1 to kappa. The batch key is ignored.
class QuadraticTask : public Objective {
 public:
  QuadraticTask(Matrix a, Vector x_star, LayerPartition partition);

  static QuadraticTask Make(const QuadraticOptions& options);
  static QuadraticTask Make(Index dim, double kappa, std::uint64_t seed) {
    return Make(QuadraticOptions{dim, kappa, seed});
  }

  const LayerPartition& partition() const override { return partition_; }
  Capabilities capabilities() const override { return {true, true, true}; }
  double Eval(const Vector& x, const BatchKey& batch) const override;
  Vector Grad(const Vector& x, const BatchKey& batch) const override;
  double Jvp(const Vector& x, const Vector& u,
             const BatchKey& batch) const override;
  Vector PartialGradFromLayer(const Vector& x, std::size_t k,
                              const BatchKey& batch) const override;
  // Both fields hold f(x) - f(x*) = f(x).
  EvalMetrics Metrics(const Vector& x) const override;
  std::vector<double> ActivationElemsPerExample() const override;

  const Matrix& a() const { return a_; }
  const Vector& x_star() const { return x_star_; }

 private:
  Matrix a_;
  Vector x_star_;
  LayerPartition partition_;
};

// f(x) = c^T x + b.
class AffineTask : public Objective {
 public:
  AffineTask(Vector c, double b, LayerPartition partition);

  const LayerPartition& partition() const override { return partition_; }
  Capabilities capabilities() const override { return {true, true, true}; }
  double Eval(const Vector& x, const BatchKey& batch) const override;
  Vector Grad(const Vector& x, const BatchKey& batch) const override;
  double Jvp(const Vector& x, const Vector& u,
             const BatchKey& batch) const override;
  Vector PartialGradFromLayer(const Vector& x, std::size_t k,
                              const BatchKey& batch) const override;

  const Vector& c() const { return c_; }

 private:
  Vector c_;
  double b_;
  LayerPartition partition_;
};

// Zeroes layers 0..k-1 of g in place.
void ZeroLayersBelow(const LayerPartition& partition, std::size_t k,
                     Vector& g);

}  // namespace zoopt

#endif  // ZOOPT_TASKS_QUADRATIC_HPP_
