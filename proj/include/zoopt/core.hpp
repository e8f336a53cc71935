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

// Shared foundations: parameter storage with a layer partition, keyed
// Gaussian streams that can be replayed from a seed, transient-buffer
// accounting, and the objective-oracle interface every optimizer talks to.

#ifndef ZOOPT_CORE_HPP_
#define ZOOPT_CORE_HPP_

#include <Eigen/Dense>

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zoopt/error.hpp"

namespace zoopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class Precision { kFull, kHalf };

struct Layer {
  std::string name;
  Index offset = 0;
  Index length = 0;
};

// Ordered, contiguous, non-overlapping split of a flat parameter vector.
class LayerPartition {
 public:
  LayerPartition() = default;

  static LayerPartition FromLengths(
      const std::vector<std::pair<std::string, Index>>& lengths);
  static LayerPartition Single(Index dim, std::string name = "x");
  // Near-equal split of `dim` coordinates into `n_layers` layers named L0..
  static LayerPartition Even(Index dim, std::size_t n_layers);

  Index dim() const { return dim_; }
  std::size_t size() const { return layers_.size(); }
  const Layer& operator[](std::size_t l) const { return layers_[l]; }
  Index max_length() const;

  auto begin() const { return layers_.begin(); }
  auto end() const { return layers_.end(); }

  bool operator==(const LayerPartition& other) const;

 private:
  std::vector<Layer> layers_;
  Index dim_ = 0;
};

class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(Vector values, LayerPartition partition,
              Precision precision = Precision::kFull);

  Vector& values() { return values_; }
  const Vector& values() const { return values_; }
  const LayerPartition& partition() const { return partition_; }
  Precision precision() const { return precision_; }
  Index dim() const { return values_.size(); }

  std::span<double> layer(std::size_t l);
  std::span<const double> layer(std::size_t l) const;

  bool all_finite() const;

 private:
  Vector values_;
  LayerPartition partition_;
  Precision precision_ = Precision::kFull;
};

// ---------------------------------------------------------------------------
// Keyed random streams.
//
// Every random vector in the library is a pure function of
// (master_seed, step, query, layer, purpose). The key tuple is hashed into a
// 64-bit stream key, and samples are drawn from a splitmix64 counter sequence
// under that key, so any layer's stream can be regenerated without touching
// the others.

enum class StreamPurpose : std::uint32_t {
  kDirection = 1,
  kMask = 2,
  kData = 3,
  kInit = 4,
};

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t NextU64();
  // Uniform on [0, 1).
  double NextUniform();
  // Uniform on (0, 1].
  double NextUniformOpen();
  double NextGaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t MixKey(std::uint64_t h, std::uint64_t v);

class SeedStream {
 public:
  explicit SeedStream(std::uint64_t master_seed = 0) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t Derive(std::uint64_t step, std::uint64_t query,
                       std::uint64_t layer, StreamPurpose purpose) const;

 private:
  std::uint64_t master_;
};

// n i.i.d. standard normals from a single stream key (Box-Muller pairs).
void GaussianFill(std::uint64_t stream_key, std::span<double> out);
Vector GaussianVector(std::uint64_t stream_key, Index n);

// ---------------------------------------------------------------------------
// Transient buffer accounting. Every scratch allocation made by the
// estimators and update rules goes through ScratchBuffer, so tests can assert
// the peak number of live scratch scalars.

struct ScratchStats {
  Index live = 0;
  Index peak = 0;
};

ScratchStats CurrentScratchStats();
void ResetScratchPeak();

// Charges n scalars to the accounting without owning them; for transient
// Eigen vectors that an oracle consumes by reference.
class ScratchCharge {
 public:
  explicit ScratchCharge(Index n);
  ~ScratchCharge();
  ScratchCharge(const ScratchCharge&) = delete;
  ScratchCharge& operator=(const ScratchCharge&) = delete;

 private:
  Index n_;
};

class ScratchBuffer {
 public:
  explicit ScratchBuffer(Index n);
  ~ScratchBuffer();
  ScratchBuffer(const ScratchBuffer&) = delete;
  ScratchBuffer& operator=(const ScratchBuffer&) = delete;

  std::span<double> span() { return {data_.data(), data_.size()}; }
  std::span<double> first(Index n) { return span().first(n); }

 private:
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Perturbation directions.

struct DirectionKey {
  std::uint64_t step = 0;
  std::uint64_t query = 0;
};

// Per-step random pruning mask applied to perturbation directions. A
// coordinate of layer l is kept when its replayed uniform draw is at least
// layer_ratios[l].
struct MaskSpec {
  SeedStream stream;
  std::uint64_t step = 0;
  std::vector<double> layer_ratios;

  void Apply(std::size_t layer, std::span<double> z) const;
};

// Streams the coordinates of z_l one at a time, so directions can be applied
// without materializing them.
class DirectionCursor {
 public:
  DirectionCursor(const SeedStream& stream, DirectionKey key,
                  std::size_t layer, const MaskSpec* mask);

  double Next() {
    const double z = gauss_.NextGaussian();
    if (ratio_ > 0.0 && mask_rng_.NextUniform() < ratio_) return 0.0;
    return z;
  }

 private:
  CounterRng gauss_;
  CounterRng mask_rng_;
  double ratio_ = 0.0;
};

// Empty selection means "all layers".
using LayerSelection = std::span<const std::size_t>;

bool Selected(LayerSelection selection, std::size_t layer);

// z_l for one layer of the direction identified by `key`, with the mask
// applied when given.
void FillDirection(const SeedStream& stream, DirectionKey key,
                   std::size_t layer, const MaskSpec* mask,
                   std::span<double> out);

// params_l += scale * z_l for every selected layer, streaming z_l from its
// key. Allocates no transient storage.
void PerturbInPlace(ParamVector& params, const SeedStream& stream,
                    DirectionKey key, double scale,
                    const MaskSpec* mask = nullptr,
                    LayerSelection layers = {});

// Elementwise out += coeff * z. All accumulation of directions goes through
// here (or AxpyDirection) so dense and replayed paths round identically.
void Axpy(double coeff, std::span<const double> z, std::span<double> out);
void AxpyDirection(double coeff, DirectionCursor cursor, std::span<double> out);

// ---------------------------------------------------------------------------
// Objective oracle.

// Identifies the mini-batch for one evaluation. All queries of one estimate
// share a key.
struct BatchKey {
  std::uint64_t dataset_seed = 0;
  std::uint64_t step = 0;
};

struct Capabilities {
  bool grad = false;
  bool jvp = false;
  bool partial_grad = false;
};

struct EvalMetrics {
  double train_loss = 0.0;
  double test_metric = 0.0;
};

class Objective {
 public:
  virtual ~Objective() = default;

  virtual const LayerPartition& partition() const = 0;
  Index dim() const { return partition().dim(); }
  virtual Capabilities capabilities() const = 0;

  // Deterministic given (x, batch); pure and reentrant.
  virtual double Eval(const Vector& x, const BatchKey& batch) const = 0;
  virtual Vector Grad(const Vector& x, const BatchKey& batch) const;
  // Directional derivative u^T grad f(x).
  virtual double Jvp(const Vector& x, const Vector& u,
                     const BatchKey& batch) const;
  // Exact gradient for layers k..n-1 (0-based), zero on layers 0..k-1.
  // Back-propagation stops at layer k.
  virtual Vector PartialGradFromLayer(const Vector& x, std::size_t k,
                                      const BatchKey& batch) const;

  // Full-data diagnostics. Not counted as queries.
  virtual EvalMetrics Metrics(const Vector& x) const;
  virtual bool metric_higher_is_better() const { return false; }
  virtual Vector InitialPoint(std::uint64_t seed) const;
  // Activation elements kept per example for back-propagation, per layer.
  // Drives the modeled memory of desk-scale runs.
  virtual std::vector<double> ActivationElemsPerExample() const;
  virtual std::size_t batch_size() const { return 1; }
};

ParamVector MakeParams(const Objective& objective, std::uint64_t seed,
                       Precision precision = Precision::kFull);

struct QueryCounts {
  std::uint64_t evals = 0;
  std::uint64_t grads = 0;
  std::uint64_t jvps = 0;
  std::uint64_t partial_grads = 0;

  std::uint64_t total() const { return evals + grads + jvps + partial_grads; }
  bool operator==(const QueryCounts&) const = default;
};

// Forwards every call to `inner` and counts oracle queries.
class CountingObjective : public Objective {
 public:
  explicit CountingObjective(const Objective& inner) : inner_(inner) {}

  const LayerPartition& partition() const override {
    return inner_.partition();
  }
  Capabilities capabilities() const override { return inner_.capabilities(); }
  double Eval(const Vector& x, const BatchKey& batch) const override;
  Vector Grad(const Vector& x, const BatchKey& batch) const override;
  double Jvp(const Vector& x, const Vector& u,
             const BatchKey& batch) const override;
  Vector PartialGradFromLayer(const Vector& x, std::size_t k,
                              const BatchKey& batch) const override;
  EvalMetrics Metrics(const Vector& x) const override {
    return inner_.Metrics(x);
  }
  bool metric_higher_is_better() const override {
    return inner_.metric_higher_is_better();
  }
  Vector InitialPoint(std::uint64_t seed) const override {
    return inner_.InitialPoint(seed);
  }
  std::vector<double> ActivationElemsPerExample() const override {
    return inner_.ActivationElemsPerExample();
  }
  std::size_t batch_size() const override { return inner_.batch_size(); }

  QueryCounts counts() const;
  void Reset();

 private:
  const Objective& inner_;
  mutable std::atomic<std::uint64_t> evals_{0};
  mutable std::atomic<std::uint64_t> grads_{0};
  mutable std::atomic<std::uint64_t> jvps_{0};
  mutable std::atomic<std::uint64_t> partial_grads_{0};
};

}  // namespace zoopt

#endif  // ZOOPT_CORE_HPP_
