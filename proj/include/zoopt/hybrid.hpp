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

#ifndef ZOOPT_HYBRID_HPP_
#define ZOOPT_HYBRID_HPP_

#include <cstddef>
#include <cstdint>

#include "zoopt/core.hpp"
#include "zoopt/estimators.hpp"
#include "zoopt/memcost.hpp"
#include "zoopt/optimizers.hpp"

namespace zoopt {

// Layers 0..k-1 (the shallow side) are trained by ZO-SGD, layers k..n-1 by
// FO-SGD with back-propagation stopping at layer k.
struct HybridConfig {
  std::size_t k = 0;
  HyperParams zo_hp;
  HyperParams fo_hp;
  Representation representation = Representation::kImplicit;

  void Validate(std::size_t n_layers) const;
};

// One hybrid step. Both halves are estimated at the same point on the same
// batch before either is applied.
void HybridStep(const Objective& objective, ParamVector& params,
                const HybridConfig& cfg, const SeedStream& stream,
                std::uint64_t step, const BatchKey& batch);

// Modeled peak bytes: weights, FO dynamic memory over the deep layers and
// one regenerated direction over the shallow layers.
double HybridMemoryNote(const ArchSpec& arch, std::size_t k, double batch,
                        double seq_len);

}  // namespace zoopt

#endif  // ZOOPT_HYBRID_HPP_
