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

// Gradient surrogates built from function values or directional
// derivatives: the q-query central-difference randomized gradient estimator
// (RGE), the forward gradient, their block-wise and sparsity-masked variants,
// and a Monte Carlo moment estimator used to check them.

#ifndef ZOOPT_ESTIMATORS_HPP_
#define ZOOPT_ESTIMATORS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "zoopt/core.hpp"

namespace zoopt {

enum class Representation { kDense, kImplicit };

// Disjoint groups of layer indices covering every layer.
struct BlockPartition {
  std::vector<std::vector<std::size_t>> blocks;

  std::size_t count() const { return blocks.size(); }
  void Validate(std::size_t n_layers) const;

  // p contiguous groups of layers, sizes as equal as possible.
  static BlockPartition Contiguous(std::size_t n_layers, std::size_t p);
};

struct SparsityConfig {
  double global_ratio = 0.0;
  // Draw a fresh mask every step.
  bool resample = true;
  // Recompute layer ratios from the current weights every step; otherwise
  // the ratios of the initial weights are kept.
  bool recompute_ratios = true;
};

struct RgeConfig {
  double mu = 1e-3;
  int q = 1;
  Representation representation = Representation::kDense;
  std::optional<SparsityConfig> sparsity;
  std::optional<BlockPartition> blocks;

  void Validate() const;
};

// coeff * z(step, query) restricted to `support` (all layers when empty) and
// masked by the owning estimate's mask.
struct DirectionTerm {
  DirectionKey key;
  double coeff = 0.0;
  std::vector<std::size_t> support;
};

// Gradient surrogate g_hat: either a dense d-vector, or the seeds and scalar
// coefficients that regenerate it.
class GradEstimate {
 public:
  struct Implicit {
    SeedStream stream;
    std::vector<DirectionTerm> terms;
    std::optional<MaskSpec> mask;
  };

  static GradEstimate Dense(Vector values);
  static GradEstimate FromTerms(SeedStream stream,
                                std::vector<DirectionTerm> terms,
                                std::optional<MaskSpec> mask = std::nullopt);

  bool is_dense() const { return std::holds_alternative<Vector>(data_); }
  const Vector& dense() const { return std::get<Vector>(data_); }
  const Implicit& implicit() const { return std::get<Implicit>(data_); }

  // Calls fn(layer, g_l) for every layer in partition order. Implicit
  // estimates are regenerated into one layer-sized scratch buffer, summing
  // terms in stored order.
  void ForEachLayer(
      const LayerPartition& partition,
      const std::function<void(std::size_t, std::span<const double>)>& fn)
      const;

 private:
  std::variant<Vector, Implicit> data_;
};

// Dense form of an estimate. Implicit terms are expanded in stored order, so
// the result matches the dense estimator path bit for bit.
Vector Materialize(const GradEstimate& estimate,
                   const LayerPartition& partition);

// Central-difference RGE:
//   (1/q) sum_i [(f(x + mu u_i) - f(x - mu u_i)) / (2 mu)] u_i
// using exactly 2q evaluations on one batch. With cfg.blocks set, dispatches
// to BlockwiseRge. Params are restored (add/subtract) before returning or
// throwing NonFiniteLoss.
GradEstimate RgeEstimate(const Objective& objective, ParamVector& params,
                         const RgeConfig& cfg, const SeedStream& stream,
                         std::uint64_t step, const BatchKey& batch,
                         const MaskSpec* mask = nullptr,
                         LayerSelection support = {});

// One central difference per block, each with its own direction supported
// on that block: 2p evaluations.
GradEstimate BlockwiseRge(const Objective& objective, ParamVector& params,
                          const RgeConfig& cfg, const SeedStream& stream,
                          std::uint64_t step, const BatchKey& batch,
                          const MaskSpec* mask = nullptr);

// Forward gradient (1/q) sum_i (grad f^T u_i) u_i, one jvp per query.
GradEstimate ForwardGradEstimate(const Objective& objective,
                                 const ParamVector& params, int q,
                                 const SeedStream& stream, std::uint64_t step,
                                 const BatchKey& batch,
                                 Representation representation =
                                     Representation::kDense);

// Layer sparsity ratios from weight magnitudes. The pruned set is the
// global_ratio * d smallest |w|; coordinates tied at the threshold magnitude
// are shared across layers in proportion to their tie counts, so the
// d-weighted mean of the result is exactly global_ratio.
std::vector<double> SparsityRatiosByMagnitude(const ParamVector& params,
                                              double global_ratio);

MaskSpec SampleSparseMask(const SeedStream& stream, std::uint64_t step,
                          const LayerPartition& partition,
                          std::vector<double> layer_ratios);

// Expanded 0/1 mask, for inspection.
std::vector<std::uint8_t> MaterializeMask(const MaskSpec& mask,
                                          const LayerPartition& partition);

struct MomentEstimate {
  Vector mean;
  Vector variance;  // per coordinate, unbiased
  double total_variance = 0.0;
  std::size_t samples = 0;
};

// Draws sample(0), ..., sample(n-1) and accumulates mean and trace of the
// covariance (Welford).
MomentEstimate EstimateMomentsMc(
    const std::function<Vector(std::uint64_t)>& sample, std::size_t n_samples);

}  // namespace zoopt

#endif  // ZOOPT_ESTIMATORS_HPP_
