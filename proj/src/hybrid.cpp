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

#include "zoopt/hybrid.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace zoopt {

void HybridConfig::Validate(std::size_t n_layers) const {
  if (k > n_layers) {
    throw InvalidArgument("hybrid split k=" + std::to_string(k) +
                          " exceeds the layer count " +
                          std::to_string(n_layers));
  }
  zo_hp.Validate();
  fo_hp.Validate();
}

void HybridStep(const Objective& objective, ParamVector& params,
                const HybridConfig& cfg, const SeedStream& stream,
                std::uint64_t step, const BatchKey& batch) {
  const std::size_t n = params.partition().size();
  cfg.Validate(n);
  if (cfg.k < n && !objective.capabilities().partial_grad) {
    throw CapabilityMissing("hybrid training needs truncated gradients");
  }

  std::optional<GradEstimate> fo;
  if (cfg.k < n) {
    fo = GradEstimate::Dense(
        objective.PartialGradFromLayer(params.values(), cfg.k, batch));
  }
  std::optional<GradEstimate> zo;
  if (cfg.k > 0) {
    std::vector<std::size_t> shallow(cfg.k);
    std::iota(shallow.begin(), shallow.end(), std::size_t{0});
    RgeConfig rge;
    rge.mu = cfg.zo_hp.mu;
    rge.q = cfg.zo_hp.q;
    rge.representation = cfg.representation;
    zo = RgeEstimate(objective, params, rge, stream, step, batch, nullptr,
                     shallow);
  }

  OptState state;
  if (fo) ApplyUpdate(OptimizerKind::kFoSgd, state, params, *fo, cfg.fo_hp);
  if (zo) ApplyUpdate(OptimizerKind::kZoSgd, state, params, *zo, cfg.zo_hp);
}

double HybridMemoryNote(const ArchSpec& arch, std::size_t k, double batch,
                        double seq_len) {
  arch.Validate();
  if (k > arch.layers.size()) {
    throw InvalidArgument("hybrid split exceeds the layer count");
  }
  double elems = arch.total_params();
  double shallow_max = 0.0;
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const double x = arch.layers[l].params;
    if (l < k) {
      shallow_max = std::max(shallow_max, x);
    } else {
      elems += std::max(arch.activation(l, batch, seq_len), x);
    }
  }
  return (elems + shallow_max) * arch.bytes_full;
}

}  // namespace zoopt
