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

#include "zoopt/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace zoopt {

void BlockPartition::Validate(std::size_t n_layers) const {
  if (blocks.empty()) throw InvalidArgument("block partition is empty");
  std::vector<int> seen(n_layers, 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw InvalidArgument("block partition has an empty block");
    for (std::size_t l : block) {
      if (l >= n_layers) {
        throw InvalidArgument("block references layer " + std::to_string(l) +
                              " of " + std::to_string(n_layers));
      }
      if (seen[l]++ != 0) {
        throw InvalidArgument("layer " + std::to_string(l) +
                              " appears in two blocks");
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw InvalidArgument("block partition does not cover every layer");
  }
}

BlockPartition BlockPartition::Contiguous(std::size_t n_layers,
                                          std::size_t p) {
  if (p == 0 || p > n_layers) {
    throw InvalidArgument("cannot group " + std::to_string(n_layers) +
                          " layers into " + std::to_string(p) + " blocks");
  }
  BlockPartition out;
  std::size_t next = 0;
  for (std::size_t b = 0; b < p; ++b) {
    const std::size_t size = n_layers / p + (b < n_layers % p ? 1 : 0);
    std::vector<std::size_t> block(size);
    std::iota(block.begin(), block.end(), next);
    next += size;
    out.blocks.push_back(std::move(block));
  }
  return out;
}

void RgeConfig::Validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidArgument("smoothing parameter mu must be positive");
  }
  if (q < 1) throw InvalidArgument("query budget q must be >= 1");
  if (sparsity) {
    const double r = sparsity->global_ratio;
    if (!(r >= 0.0 && r < 1.0)) {
      throw InvalidArgument("sparsity ratio must lie in [0, 1)");
    }
  }
}

// ---------------------------------------------------------------------------
// GradEstimate

GradEstimate GradEstimate::Dense(Vector values) {
  GradEstimate e;
  e.data_ = std::move(values);
  return e;
}

GradEstimate GradEstimate::FromTerms(SeedStream stream,
                                     std::vector<DirectionTerm> terms,
                                     std::optional<MaskSpec> mask) {
  GradEstimate e;
  e.data_ = Implicit{stream, std::move(terms), std::move(mask)};
  return e;
}

void GradEstimate::ForEachLayer(
    const LayerPartition& partition,
    const std::function<void(std::size_t, std::span<const double>)>& fn)
    const {
  if (is_dense()) {
    const Vector& v = dense();
    if (v.size() != partition.dim()) {
      throw DimensionMismatch("estimate dimension " + std::to_string(v.size()) +
                              " does not match parameters " +
                              std::to_string(partition.dim()));
    }
    for (std::size_t l = 0; l < partition.size(); ++l) {
      fn(l, {v.data() + partition[l].offset,
             static_cast<std::size_t>(partition[l].length)});
    }
    return;
  }
  const Implicit& imp = implicit();
  const MaskSpec* mask = imp.mask ? &*imp.mask : nullptr;
  ScratchBuffer scratch(partition.max_length());
  for (std::size_t l = 0; l < partition.size(); ++l) {
    auto g = scratch.first(partition[l].length);
    std::fill(g.begin(), g.end(), 0.0);
    for (const DirectionTerm& term : imp.terms) {
      if (!Selected(term.support, l)) continue;
      AxpyDirection(term.coeff, DirectionCursor(imp.stream, term.key, l, mask),
                    g);
    }
    fn(l, g);
  }
}

Vector Materialize(const GradEstimate& estimate,
                   const LayerPartition& partition) {
  if (estimate.is_dense()) return estimate.dense();
  const auto& imp = estimate.implicit();
  const MaskSpec* mask = imp.mask ? &*imp.mask : nullptr;
  Vector out = Vector::Zero(partition.dim());
  for (const DirectionTerm& term : imp.terms) {
    for (std::size_t l = 0; l < partition.size(); ++l) {
      if (!Selected(term.support, l)) continue;
      AxpyDirection(term.coeff, DirectionCursor(imp.stream, term.key, l, mask),
                    {out.data() + partition[l].offset,
                     static_cast<std::size_t>(partition[l].length)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Central-difference estimators

namespace {

std::span<double> Slice(Vector& v, const Layer& layer) {
  return {v.data() + layer.offset, static_cast<std::size_t>(layer.length)};
}

std::span<const double> Slice(const Vector& v, const Layer& layer) {
  return {v.data() + layer.offset, static_cast<std::size_t>(layer.length)};
}

void CheckFinite(double f, const char* side) {
  if (!std::isfinite(f)) {
    throw NonFiniteLoss(std::string("non-finite loss at x ") + side +
                        " mu*u");
  }
}

// Scalar (f(x + mu u) - f(x - mu u)) / (2 mu) along one direction, using the
// MeZO add/subtract sequence +mu, -2mu, +mu. `u` is the materialized
// direction in dense mode, or null to stream it from the seed.
double CentralDifference(const Objective& objective, ParamVector& params,
                         double mu, const SeedStream& stream, DirectionKey key,
                         const MaskSpec* mask, LayerSelection support,
                         const Vector* u, const BatchKey& batch) {
  const LayerPartition& partition = params.partition();
  auto shift = [&](double scale) {
    if (u == nullptr) {
      PerturbInPlace(params, stream, key, scale, mask, support);
      return;
    }
    for (std::size_t l = 0; l < partition.size(); ++l) {
      if (!Selected(support, l)) continue;
      Axpy(scale, Slice(*u, partition[l]), params.layer(l));
    }
  };

  shift(mu);
  const double f_plus = objective.Eval(params.values(), batch);
  if (!std::isfinite(f_plus)) {
    shift(-mu);
    CheckFinite(f_plus, "+");
  }
  shift(-2.0 * mu);
  const double f_minus = objective.Eval(params.values(), batch);
  shift(mu);
  CheckFinite(f_minus, "-");
  return (f_plus - f_minus) / (2.0 * mu);
}

// Full direction for dense mode. Layers outside the support stay zero.
void FillDenseDirection(const SeedStream& stream, DirectionKey key,
                        const MaskSpec* mask, LayerSelection support,
                        const LayerPartition& partition, Vector& u) {
  u.setZero();
  for (std::size_t l = 0; l < partition.size(); ++l) {
    if (!Selected(support, l)) continue;
    FillDirection(stream, key, l, mask, Slice(u, partition[l]));
  }
}

void AccumulateDense(double coeff, const Vector& u, LayerSelection support,
                     const LayerPartition& partition, Vector& out) {
  for (std::size_t l = 0; l < partition.size(); ++l) {
    if (!Selected(support, l)) continue;
    Axpy(coeff, Slice(u, partition[l]), Slice(out, partition[l]));
  }
}

std::optional<MaskSpec> CopyMask(const MaskSpec* mask) {
  if (mask == nullptr) return std::nullopt;
  return *mask;
}

}  // namespace

GradEstimate RgeEstimate(const Objective& objective, ParamVector& params,
                         const RgeConfig& cfg, const SeedStream& stream,
                         std::uint64_t step, const BatchKey& batch,
                         const MaskSpec* mask, LayerSelection support) {
  cfg.Validate();
  if (cfg.blocks) {
    return BlockwiseRge(objective, params, cfg, stream, step, batch, mask);
  }
  const LayerPartition& partition = params.partition();
  if (objective.dim() != params.dim()) {
    throw DimensionMismatch("objective and parameter dimensions differ");
  }
  std::vector<std::size_t> support_copy(support.begin(), support.end());

  if (cfg.representation == Representation::kImplicit) {
    std::vector<DirectionTerm> terms;
    terms.reserve(static_cast<std::size_t>(cfg.q));
    for (int i = 0; i < cfg.q; ++i) {
      const DirectionKey key{step, static_cast<std::uint64_t>(i)};
      const double slope = CentralDifference(objective, params, cfg.mu, stream,
                                             key, mask, support, nullptr, batch);
      terms.push_back({key, slope / cfg.q, support_copy});
    }
    return GradEstimate::FromTerms(stream, std::move(terms), CopyMask(mask));
  }

  // Dense ("vanilla") path: the direction is held as a full d-vector.
  ScratchCharge u_charge(partition.dim());
  ScratchCharge g_charge(partition.dim());
  Vector u(partition.dim());
  Vector g = Vector::Zero(partition.dim());
  for (int i = 0; i < cfg.q; ++i) {
    const DirectionKey key{step, static_cast<std::uint64_t>(i)};
    FillDenseDirection(stream, key, mask, support, partition, u);
    const double slope = CentralDifference(objective, params, cfg.mu, stream,
                                           key, mask, support, &u, batch);
    AccumulateDense(slope / cfg.q, u, support, partition, g);
  }
  return GradEstimate::Dense(std::move(g));
}

GradEstimate BlockwiseRge(const Objective& objective, ParamVector& params,
                          const RgeConfig& cfg, const SeedStream& stream,
                          std::uint64_t step, const BatchKey& batch,
                          const MaskSpec* mask) {
  if (!cfg.blocks) throw InvalidArgument("block-wise RGE needs a block partition");
  const LayerPartition& partition = params.partition();
  const BlockPartition& blocks = *cfg.blocks;
  blocks.Validate(partition.size());

  if (cfg.representation == Representation::kImplicit) {
    std::vector<DirectionTerm> terms;
    for (std::size_t b = 0; b < blocks.count(); ++b) {
      const DirectionKey key{step, b};
      const double slope =
          CentralDifference(objective, params, cfg.mu, stream, key, mask,
                            blocks.blocks[b], nullptr, batch);
      terms.push_back({key, slope, blocks.blocks[b]});
    }
    return GradEstimate::FromTerms(stream, std::move(terms), CopyMask(mask));
  }

  ScratchCharge u_charge(partition.dim());
  ScratchCharge g_charge(partition.dim());
  Vector u(partition.dim());
  Vector g = Vector::Zero(partition.dim());
  for (std::size_t b = 0; b < blocks.count(); ++b) {
    const DirectionKey key{step, b};
    const auto& support = blocks.blocks[b];
    FillDenseDirection(stream, key, mask, support, partition, u);
    const double slope = CentralDifference(objective, params, cfg.mu, stream,
                                           key, mask, support, &u, batch);
    AccumulateDense(slope, u, support, partition, g);
  }
  return GradEstimate::Dense(std::move(g));
}

GradEstimate ForwardGradEstimate(const Objective& objective,
                                 const ParamVector& params, int q,
                                 const SeedStream& stream, std::uint64_t step,
                                 const BatchKey& batch,
                                 Representation representation) {
  if (!objective.capabilities().jvp) {
    throw CapabilityMissing("forward gradient needs a jvp oracle");
  }
  if (q < 1) throw InvalidArgument("query budget q must be >= 1");
  const LayerPartition& partition = params.partition();
  // The jvp oracle consumes a materialized direction in either mode.
  ScratchCharge u_charge(partition.dim());
  Vector u(partition.dim());
  std::vector<DirectionTerm> terms;
  Vector g;
  if (representation == Representation::kDense) {
    g = Vector::Zero(partition.dim());
  }
  for (int i = 0; i < q; ++i) {
    const DirectionKey key{step, static_cast<std::uint64_t>(i)};
    FillDenseDirection(stream, key, nullptr, {}, partition, u);
    const double slope = objective.Jvp(params.values(), u, batch);
    if (!std::isfinite(slope)) {
      throw NonFiniteLoss("non-finite directional derivative");
    }
    if (representation == Representation::kDense) {
      AccumulateDense(slope / q, u, {}, partition, g);
    } else {
      terms.push_back({key, slope / q, {}});
    }
  }
  if (representation == Representation::kDense) {
    return GradEstimate::Dense(std::move(g));
  }
  return GradEstimate::FromTerms(stream, std::move(terms));
}

// ---------------------------------------------------------------------------
// Sparsity

std::vector<double> SparsityRatiosByMagnitude(const ParamVector& params,
                                              double global_ratio) {
  if (!(global_ratio >= 0.0 && global_ratio < 1.0)) {
    throw InvalidArgument("global sparsity ratio must lie in [0, 1)");
  }
  const LayerPartition& partition = params.partition();
  std::vector<double> ratios(partition.size(), 0.0);
  const Index d = params.dim();
  const double n_prune = global_ratio * static_cast<double>(d);
  if (n_prune <= 0.0) return ratios;

  Vector magnitude = params.values().cwiseAbs();
  std::vector<double> sorted(magnitude.data(), magnitude.data() + d);
  const auto pivot =
      static_cast<std::size_t>(std::ceil(n_prune)) - 1;  // n_prune > 0
  std::nth_element(sorted.begin(), sorted.begin() + pivot, sorted.end());
  const double threshold = sorted[pivot];

  std::vector<double> below(partition.size(), 0.0);
  std::vector<double> ties(partition.size(), 0.0);
  double below_total = 0.0;
  double tie_total = 0.0;
  for (std::size_t l = 0; l < partition.size(); ++l) {
    for (double w : Slice(magnitude, partition[l])) {
      if (w < threshold) {
        below[l] += 1.0;
      } else if (w == threshold) {
        ties[l] += 1.0;
      }
    }
    below_total += below[l];
    tie_total += ties[l];
  }
  const double tie_share =
      tie_total > 0.0 ? (n_prune - below_total) / tie_total : 0.0;
  for (std::size_t l = 0; l < partition.size(); ++l) {
    const double pruned = below[l] + ties[l] * tie_share;
    ratios[l] = pruned / static_cast<double>(partition[l].length);
  }
  return ratios;
}

MaskSpec SampleSparseMask(const SeedStream& stream, std::uint64_t step,
                          const LayerPartition& partition,
                          std::vector<double> layer_ratios) {
  if (layer_ratios.size() != partition.size()) {
    throw DimensionMismatch("one sparsity ratio per layer is required");
  }
  for (double r : layer_ratios) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw InvalidArgument("layer sparsity ratio outside [0, 1]");
    }
  }
  return MaskSpec{stream, step, std::move(layer_ratios)};
}

std::vector<std::uint8_t> MaterializeMask(const MaskSpec& mask,
                                          const LayerPartition& partition) {
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(partition.dim()));
  for (std::size_t l = 0; l < partition.size(); ++l) {
    std::vector<double> ones(static_cast<std::size_t>(partition[l].length),
                             1.0);
    mask.Apply(l, ones);
    for (double v : ones) out.push_back(v != 0.0 ? 1 : 0);
  }
  return out;
}

// ---------------------------------------------------------------------------

MomentEstimate EstimateMomentsMc(
    const std::function<Vector(std::uint64_t)>& sample,
    std::size_t n_samples) {
  if (n_samples < 2) throw InvalidArgument("need at least two samples");
  MomentEstimate out;
  Vector mean;
  Vector m2;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Vector x = sample(i);
    if (i == 0) {
      mean = Vector::Zero(x.size());
      m2 = Vector::Zero(x.size());
    }
    const Vector delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta.cwiseProduct(x - mean);
  }
  out.mean = std::move(mean);
  out.variance = m2 / static_cast<double>(n_samples - 1);
  out.total_variance = out.variance.sum();
  out.samples = n_samples;
  return out;
}

}  // namespace zoopt
