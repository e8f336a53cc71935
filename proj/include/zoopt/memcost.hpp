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

#ifndef ZOOPT_MEMCOST_HPP_
#define ZOOPT_MEMCOST_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zoopt/core.hpp"
#include "zoopt/estimators.hpp"
#include "zoopt/optimizers.hpp"

namespace zoopt {

// Per-layer sizes in elements. Activation elements kept for
// back-propagation are act_c0 + act_c1 * batch * seq_len.
struct LayerCost {
  std::string name;
  double params = 0.0;
  double act_c0 = 0.0;
  double act_c1 = 0.0;
  // Trainable low-rank adapter elements attached to the layer (0 if none).
  double adapter_params = 0.0;
};

struct ArchSpec {
  std::string name;
  std::vector<LayerCost> layers;
  bool has_adapter = false;
  double bytes_full = 4.0;
  double bytes_half = 2.0;
  double nominal_batch = 1.0;
  double nominal_seq_len = 1.0;

  void Validate() const;
  double total_params() const;
  double total_adapter() const;
  double activation(std::size_t l, double batch, double seq_len) const;

  static ArchSpec FromJsonText(std::string_view text);
  static ArchSpec Load(const std::string& path);
};

// Builds a spec for a desk-scale objective: one entry per layer with
// ActivationElemsPerExample as the batch coefficient (seq_len 1) and
// double-precision element size.
ArchSpec ArchFromObjective(const Objective& objective,
                           std::string name = "objective");

enum class MemKind {
  kFoSgd,
  kFoAdamNoForeach,
  kFoAdam,
  kForwardGrad,
  kVanillaZoSgd,
  kZoSgd,
  kZoSgdMmt,
  kZoAdam,
};

std::string_view ToString(MemKind kind);
MemKind ParseMemKind(std::string_view name);
const std::vector<MemKind>& AllMemKinds();

// Full: everything in full precision. F16: model and training in half
// precision (ZO only). FP16: mixed precision training (FO only).
enum class PrecisionMode { kFull, kF16, kFP16 };

std::string_view ToString(PrecisionMode mode);
PrecisionMode ParsePrecisionMode(std::string_view name);
bool IsCompatible(MemKind kind, PrecisionMode mode);

struct MemoryReport {
  double weight_bytes = 0.0;
  double opt_state_bytes = 0.0;
  double dynamic_bytes = 0.0;
  double peak_bytes = 0.0;
};

MemoryReport PeakMemoryFt(const ArchSpec& arch, MemKind kind,
                          PrecisionMode precision, double batch,
                          double seq_len);
MemoryReport PeakMemoryLora(const ArchSpec& arch, MemKind kind,
                            PrecisionMode precision, double batch,
                            double seq_len);

struct SeqLenSweep {
  std::vector<MemKind> kinds;
  std::vector<double> lengths;
  // peak_bytes[k][i] for kinds[k] at lengths[i].
  std::vector<std::vector<double>> peak_bytes;
  // Length at which the first layer's activations overtake its parameters;
  // FO-SGD is flat below it and strictly increasing above it.
  std::optional<double> knee_length;
  // Length at which total activations overtake total parameters.
  std::optional<double> overtake_length;
};

SeqLenSweep SweepSeqLen(const ArchSpec& arch, const std::vector<MemKind>& kinds,
                        const std::vector<double>& lengths,
                        PrecisionMode precision, double batch);

std::optional<double> CrossoverKnee(const ArchSpec& arch, double batch);
std::optional<double> ActivationOvertake(const ArchSpec& arch, double batch);

// Memory row that models a training run of the given optimizer.
MemKind MemoryKindFor(OptimizerKind kind, Representation representation);

constexpr double kBytesPerGB = 1e9;

}  // namespace zoopt

#endif  // ZOOPT_MEMCOST_HPP_
