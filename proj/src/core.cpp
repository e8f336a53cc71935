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

#include "zoopt/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace zoopt {

// ---------------------------------------------------------------------------
// LayerPartition / ParamVector

LayerPartition LayerPartition::FromLengths(
    const std::vector<std::pair<std::string, Index>>& lengths) {
  if (lengths.empty()) {
    throw InvalidArgument("layer partition needs at least one layer");
  }
  LayerPartition p;
  Index offset = 0;
  for (const auto& [name, length] : lengths) {
    if (length < 1) {
      throw InvalidArgument("layer '" + name + "' has length < 1");
    }
    p.layers_.push_back({name, offset, length});
    offset += length;
  }
  p.dim_ = offset;
  return p;
}

LayerPartition LayerPartition::Single(Index dim, std::string name) {
  return FromLengths({{std::move(name), dim}});
}

LayerPartition LayerPartition::Even(Index dim, std::size_t n_layers) {
  if (n_layers == 0 || static_cast<Index>(n_layers) > dim) {
    throw InvalidArgument("cannot split dimension " + std::to_string(dim) +
                          " into " + std::to_string(n_layers) + " layers");
  }
  std::vector<std::pair<std::string, Index>> lengths;
  const Index n = static_cast<Index>(n_layers);
  for (Index l = 0; l < n; ++l) {
    const Index length = dim / n + (l < dim % n ? 1 : 0);
    lengths.emplace_back("L" + std::to_string(l), length);
  }
  return FromLengths(lengths);
}

Index LayerPartition::max_length() const {
  Index m = 0;
  for (const auto& layer : layers_) m = std::max(m, layer.length);
  return m;
}

bool LayerPartition::operator==(const LayerPartition& other) const {
  if (dim_ != other.dim_ || layers_.size() != other.layers_.size()) {
    return false;
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].offset != other.layers_[l].offset ||
        layers_[l].length != other.layers_[l].length) {
      return false;
    }
  }
  return true;
}

ParamVector::ParamVector(Vector values, LayerPartition partition,
                         Precision precision)
    : values_(std::move(values)),
      partition_(std::move(partition)),
      precision_(precision) {
  if (values_.size() != partition_.dim()) {
    throw DimensionMismatch("parameter buffer has " +
                            std::to_string(values_.size()) +
                            " entries, partition covers " +
                            std::to_string(partition_.dim()));
  }
  if (!all_finite()) {
    throw InvalidArgument("parameter vector contains non-finite entries");
  }
}

std::span<double> ParamVector::layer(std::size_t l) {
  const Layer& layer = partition_[l];
  return {values_.data() + layer.offset, static_cast<std::size_t>(layer.length)};
}

std::span<const double> ParamVector::layer(std::size_t l) const {
  const Layer& layer = partition_[l];
  return {values_.data() + layer.offset, static_cast<std::size_t>(layer.length)};
}

bool ParamVector::all_finite() const { return values_.allFinite(); }

// ---------------------------------------------------------------------------
// Random streams

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t SplitMix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t MixKey(std::uint64_t h, std::uint64_t v) {
  return SplitMix(h ^ SplitMix(v + kGolden));
}

std::uint64_t CounterRng::NextU64() {
  ++counter_;
  return SplitMix(key_ + counter_ * kGolden);
}

double CounterRng::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double CounterRng::NextUniformOpen() {
  return (static_cast<double>(NextU64() >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::NextGaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = NextUniformOpen();
  const double u2 = NextUniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t SeedStream::Derive(std::uint64_t step, std::uint64_t query,
                                 std::uint64_t layer,
                                 StreamPurpose purpose) const {
  std::uint64_t h = SplitMix(master_ ^ 0x5A0F7C3D2B1E4A69ULL);
  h = MixKey(h, static_cast<std::uint64_t>(purpose));
  h = MixKey(h, step);
  h = MixKey(h, query);
  h = MixKey(h, layer);
  return h;
}

void GaussianFill(std::uint64_t stream_key, std::span<double> out) {
  CounterRng rng(stream_key);
  for (double& v : out) v = rng.NextGaussian();
}

Vector GaussianVector(std::uint64_t stream_key, Index n) {
  Vector v(n);
  GaussianFill(stream_key, {v.data(), static_cast<std::size_t>(n)});
  return v;
}

// ---------------------------------------------------------------------------
// Scratch accounting

namespace {

thread_local ScratchStats g_scratch;

}  // namespace

ScratchStats CurrentScratchStats() { return g_scratch; }

void ResetScratchPeak() { g_scratch.peak = g_scratch.live; }

ScratchCharge::ScratchCharge(Index n) : n_(n) {
  g_scratch.live += n;
  g_scratch.peak = std::max(g_scratch.peak, g_scratch.live);
}

ScratchCharge::~ScratchCharge() { g_scratch.live -= n_; }

ScratchBuffer::ScratchBuffer(Index n) : data_(static_cast<std::size_t>(n)) {
  g_scratch.live += n;
  g_scratch.peak = std::max(g_scratch.peak, g_scratch.live);
}

ScratchBuffer::~ScratchBuffer() {
  g_scratch.live -= static_cast<Index>(data_.size());
}

// ---------------------------------------------------------------------------
// Directions

void MaskSpec::Apply(std::size_t layer, std::span<double> z) const {
  const double ratio = layer_ratios.at(layer);
  if (ratio <= 0.0) return;
  CounterRng rng(stream.Derive(step, 0, layer, StreamPurpose::kMask));
  for (double& v : z) {
    if (rng.NextUniform() < ratio) v = 0.0;
  }
}

DirectionCursor::DirectionCursor(const SeedStream& stream, DirectionKey key,
                                 std::size_t layer, const MaskSpec* mask)
    : gauss_(stream.Derive(key.step, key.query, layer,
                           StreamPurpose::kDirection)),
      mask_rng_(mask != nullptr ? mask->stream.Derive(mask->step, 0, layer,
                                                      StreamPurpose::kMask)
                                : 0),
      ratio_(mask != nullptr ? mask->layer_ratios.at(layer) : 0.0) {}

bool Selected(LayerSelection selection, std::size_t layer) {
  return selection.empty() ||
         std::find(selection.begin(), selection.end(), layer) !=
             selection.end();
}

void FillDirection(const SeedStream& stream, DirectionKey key,
                   std::size_t layer, const MaskSpec* mask,
                   std::span<double> out) {
  DirectionCursor cursor(stream, key, layer, mask);
  for (double& v : out) v = cursor.Next();
}

void PerturbInPlace(ParamVector& params, const SeedStream& stream,
                    DirectionKey key, double scale, const MaskSpec* mask,
                    LayerSelection layers) {
  if (!std::isfinite(scale)) {
    throw InvalidArgument("perturbation scale must be finite");
  }
  if (scale == 0.0) return;
  const LayerPartition& partition = params.partition();
  for (std::size_t l = 0; l < partition.size(); ++l) {
    if (!Selected(layers, l)) continue;
    AxpyDirection(scale, DirectionCursor(stream, key, l, mask),
                  params.layer(l));
  }
}

void Axpy(double coeff, std::span<const double> z, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeff * z[i];
}

void AxpyDirection(double coeff, DirectionCursor cursor,
                   std::span<double> out) {
  for (double& v : out) v += coeff * cursor.Next();
}

// ---------------------------------------------------------------------------
// Objective defaults

Vector Objective::Grad(const Vector&, const BatchKey&) const {
  throw CapabilityMissing("objective does not provide gradients");
}

double Objective::Jvp(const Vector&, const Vector&, const BatchKey&) const {
  throw CapabilityMissing("objective does not provide directional derivatives");
}

Vector Objective::PartialGradFromLayer(const Vector&, std::size_t,
                                       const BatchKey&) const {
  throw CapabilityMissing("objective does not provide truncated gradients");
}

EvalMetrics Objective::Metrics(const Vector& x) const {
  const double f = Eval(x, BatchKey{});
  return {f, f};
}

Vector Objective::InitialPoint(std::uint64_t) const {
  return Vector::Zero(dim());
}

std::vector<double> Objective::ActivationElemsPerExample() const {
  return std::vector<double>(partition().size(), 0.0);
}

ParamVector MakeParams(const Objective& objective, std::uint64_t seed,
                       Precision precision) {
  return ParamVector(objective.InitialPoint(seed), objective.partition(),
                     precision);
}

double CountingObjective::Eval(const Vector& x, const BatchKey& batch) const {
  evals_.fetch_add(1, std::memory_order_relaxed);
  return inner_.Eval(x, batch);
}

Vector CountingObjective::Grad(const Vector& x, const BatchKey& batch) const {
  grads_.fetch_add(1, std::memory_order_relaxed);
  return inner_.Grad(x, batch);
}

double CountingObjective::Jvp(const Vector& x, const Vector& u,
                              const BatchKey& batch) const {
  jvps_.fetch_add(1, std::memory_order_relaxed);
  return inner_.Jvp(x, u, batch);
}

Vector CountingObjective::PartialGradFromLayer(const Vector& x, std::size_t k,
                                               const BatchKey& batch) const {
  partial_grads_.fetch_add(1, std::memory_order_relaxed);
  return inner_.PartialGradFromLayer(x, k, batch);
}

QueryCounts CountingObjective::counts() const {
  return {evals_.load(), grads_.load(), jvps_.load(), partial_grads_.load()};
}

void CountingObjective::Reset() {
  evals_ = 0;
  grads_ = 0;
  jvps_ = 0;
  partial_grads_ = 0;
}

}  // namespace zoopt
