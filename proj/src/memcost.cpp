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

#include "zoopt/memcost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace zoopt {

namespace {

using nlohmann::json;

double NumberField(const json& obj, const char* key, double fallback,
                   bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw ConfigError(std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!it->is_number()) {
    throw ConfigError(std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

void CheckCount(double v, const std::string& what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw ConfigError(what + " must be a finite non-negative number");
  }
}

}  // namespace

void ArchSpec::Validate() const {
  if (layers.empty()) throw ConfigError("architecture has no layers");
  for (const auto& layer : layers) {
    CheckCount(layer.params, "params of layer '" + layer.name + "'");
    CheckCount(layer.act_c0, "act_c0 of layer '" + layer.name + "'");
    CheckCount(layer.act_c1, "act_c1 of layer '" + layer.name + "'");
    CheckCount(layer.adapter_params,
               "adapter_params of layer '" + layer.name + "'");
  }
  if (!(bytes_full > 0.0) || !(bytes_half > 0.0)) {
    throw ConfigError("element sizes must be positive");
  }
  if (!(nominal_batch > 0.0) || !(nominal_seq_len > 0.0)) {
    throw ConfigError("nominal batch and sequence length must be positive");
  }
}

double ArchSpec::total_params() const {
  double total = 0.0;
  for (const auto& layer : layers) total += layer.params;
  return total;
}

double ArchSpec::total_adapter() const {
  double total = 0.0;
  for (const auto& layer : layers) total += layer.adapter_params;
  return total;
}

double ArchSpec::activation(std::size_t l, double batch,
                            double seq_len) const {
  return layers[l].act_c0 + layers[l].act_c1 * batch * seq_len;
}

ArchSpec ArchSpec::FromJsonText(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("architecture file: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("architecture file must hold an object");
  static const char* kKnown[] = {"name",          "layers",
                                 "adapter_params", "bytes_full",
                                 "bytes_half",    "nominal_batch",
                                 "nominal_seq_len", "description"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) {
          return key == k;
        }) == std::end(kKnown)) {
      throw ConfigError("unknown architecture field '" + key + "'");
    }
  }
  ArchSpec arch;
  arch.name = doc.value("name", std::string("arch"));
  arch.bytes_full = NumberField(doc, "bytes_full", 4.0, false);
  arch.bytes_half = NumberField(doc, "bytes_half", 2.0, false);
  arch.nominal_batch = NumberField(doc, "nominal_batch", 1.0, false);
  arch.nominal_seq_len = NumberField(doc, "nominal_seq_len", 1.0, false);

  auto layers = doc.find("layers");
  if (layers == doc.end() || !layers->is_array()) {
    throw ConfigError("architecture needs a 'layers' array");
  }
  for (const auto& entry : *layers) {
    if (!entry.is_object()) throw ConfigError("layer entries must be objects");
    for (const auto& [key, value] : entry.items()) {
      if (key != "name" && key != "params" && key != "act_c0" &&
          key != "act_c1") {
        throw ConfigError("unknown layer field '" + key + "'");
      }
    }
    LayerCost layer;
    layer.name = entry.value("name", "layer" + std::to_string(arch.layers.size()));
    layer.params = NumberField(entry, "params", 0.0, true);
    layer.act_c0 = NumberField(entry, "act_c0", 0.0, false);
    layer.act_c1 = NumberField(entry, "act_c1", 0.0, false);
    arch.layers.push_back(std::move(layer));
  }

  auto adapter = doc.find("adapter_params");
  if (adapter != doc.end()) {
    if (!adapter->is_array() || adapter->size() != arch.layers.size()) {
      throw ConfigError("'adapter_params' must list one count per layer");
    }
    for (std::size_t l = 0; l < arch.layers.size(); ++l) {
      if (!(*adapter)[l].is_number()) {
        throw ConfigError("'adapter_params' entries must be numbers");
      }
      arch.layers[l].adapter_params = (*adapter)[l].get<double>();
    }
    arch.has_adapter = true;
  }
  arch.Validate();
  return arch;
}

ArchSpec ArchSpec::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open architecture file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return FromJsonText(text.str());
}

ArchSpec ArchFromObjective(const Objective& objective, std::string name) {
  ArchSpec arch;
  arch.name = std::move(name);
  arch.bytes_full = sizeof(double);
  arch.bytes_half = sizeof(float);
  arch.nominal_batch = static_cast<double>(objective.batch_size());
  arch.nominal_seq_len = 1.0;
  const auto acts = objective.ActivationElemsPerExample();
  const auto& partition = objective.partition();
  for (std::size_t l = 0; l < partition.size(); ++l) {
    LayerCost layer;
    layer.name = partition[l].name;
    layer.params = static_cast<double>(partition[l].length);
    layer.act_c1 = l < acts.size() ? acts[l] : 0.0;
    arch.layers.push_back(std::move(layer));
  }
  return arch;
}

// ---------------------------------------------------------------------------
// Names

namespace {

struct MemKindName {
  MemKind kind;
  std::string_view name;
};

constexpr MemKindName kMemKindNames[] = {
    {MemKind::kFoSgd, "fo_sgd"},
    {MemKind::kFoAdamNoForeach, "fo_adam_no_foreach"},
    {MemKind::kFoAdam, "fo_adam"},
    {MemKind::kForwardGrad, "forward_grad"},
    {MemKind::kVanillaZoSgd, "vanilla_zo_sgd"},
    {MemKind::kZoSgd, "zo_sgd"},
    {MemKind::kZoSgdMmt, "zo_sgd_mmt"},
    {MemKind::kZoAdam, "zo_adam"},
};

bool IsFoKind(MemKind kind) {
  return kind == MemKind::kFoSgd || kind == MemKind::kFoAdamNoForeach ||
         kind == MemKind::kFoAdam;
}

bool IsZoKind(MemKind kind) {
  return kind == MemKind::kVanillaZoSgd || kind == MemKind::kZoSgd ||
         kind == MemKind::kZoSgdMmt || kind == MemKind::kZoAdam;
}

}  // namespace

std::string_view ToString(MemKind kind) {
  for (const auto& entry : kMemKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

MemKind ParseMemKind(std::string_view name) {
  for (const auto& entry : kMemKindNames) {
    if (entry.name == name) return entry.kind;
  }
  // Optimizer names that share a memory row.
  if (name == "zo_sgd_sign" || name == "zo_sgd_cons") return MemKind::kZoSgd;
  throw InvalidArgument("unknown memory kind '" + std::string(name) + "'");
}

const std::vector<MemKind>& AllMemKinds() {
  static const std::vector<MemKind> kinds = {
      MemKind::kFoSgd,        MemKind::kFoAdamNoForeach, MemKind::kFoAdam,
      MemKind::kForwardGrad,  MemKind::kVanillaZoSgd,    MemKind::kZoSgd,
      MemKind::kZoSgdMmt,     MemKind::kZoAdam};
  return kinds;
}

std::string_view ToString(PrecisionMode mode) {
  switch (mode) {
    case PrecisionMode::kFull:
      return "full";
    case PrecisionMode::kF16:
      return "f16";
    case PrecisionMode::kFP16:
      return "fp16";
  }
  return "unknown";
}

PrecisionMode ParsePrecisionMode(std::string_view name) {
  if (name == "full") return PrecisionMode::kFull;
  if (name == "f16") return PrecisionMode::kF16;
  if (name == "fp16") return PrecisionMode::kFP16;
  throw InvalidArgument("unknown precision mode '" + std::string(name) + "'");
}

bool IsCompatible(MemKind kind, PrecisionMode mode) {
  switch (mode) {
    case PrecisionMode::kFull:
      return true;
    case PrecisionMode::kF16:
      return IsZoKind(kind);
    case PrecisionMode::kFP16:
      return IsFoKind(kind);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Formulas

namespace {

void CheckCompatible(MemKind kind, PrecisionMode precision) {
  if (!IsCompatible(kind, precision)) {
    throw IncompatiblePrecision(std::string(ToString(kind)) +
                                " cannot run in " +
                                std::string(ToString(precision)) + " mode");
  }
}

void CheckShape(double batch, double seq_len) {
  if (!(batch > 0.0) || !(seq_len > 0.0) || !std::isfinite(batch) ||
      !std::isfinite(seq_len)) {
    throw InvalidArgument("batch and sequence length must be positive");
  }
}

// `trainable(l)` is x_l for full fine-tuning and eps_l for LoRA.
template <typename Trainable>
MemoryReport Compose(const ArchSpec& arch, MemKind kind,
                     PrecisionMode precision, double batch, double seq_len,
                     Trainable trainable) {
  arch.Validate();
  CheckCompatible(kind, precision);
  CheckShape(batch, seq_len);

  double x_total = 0.0, t_total = 0.0, t_max = 0.0, a_total = 0.0,
         a_max = 0.0, sum_max = 0.0;
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const double x = arch.layers[l].params;
    const double t = trainable(l);
    const double a = arch.activation(l, batch, seq_len);
    x_total += x;
    t_total += t;
    t_max = std::max(t_max, t);
    a_total += a;
    a_max = std::max(a_max, a);
    sum_max += std::max(a, t);
  }

  // Element size of the model and of the ZO state; F16 halves both.
  const double model = precision == PrecisionMode::kF16 ? arch.bytes_half
                                                        : arch.bytes_full;
  const double full = arch.bytes_full;

  MemoryReport r;
  r.weight_bytes = x_total * model;
  switch (kind) {
    case MemKind::kFoSgd:
    case MemKind::kFoAdamNoForeach:
    case MemKind::kFoAdam: {
      if (precision == PrecisionMode::kFP16) {
        double mixed = 0.0;
        for (std::size_t l = 0; l < arch.layers.size(); ++l) {
          mixed += std::max(arch.activation(l, batch, seq_len) * arch.bytes_half,
                            trainable(l) * full);
        }
        r.dynamic_bytes =
            std::max((a_total + x_total) * arch.bytes_half, mixed);
      } else {
        r.dynamic_bytes = sum_max * full;
      }
      const double states = kind == MemKind::kFoSgd            ? 0.0
                            : kind == MemKind::kFoAdamNoForeach ? 2.0
                                                                : 3.0;
      r.opt_state_bytes = states * t_total * full;
      break;
    }
    case MemKind::kForwardGrad:
      r.dynamic_bytes = (t_total + a_max) * full;
      break;
    case MemKind::kVanillaZoSgd:
      r.dynamic_bytes = t_total * model;
      break;
    case MemKind::kZoSgd:
      r.dynamic_bytes = t_max * model;
      break;
    case MemKind::kZoSgdMmt:
      r.opt_state_bytes = t_total * model;
      r.dynamic_bytes = t_max * model;
      break;
    case MemKind::kZoAdam:
      r.opt_state_bytes = 2.0 * t_total * model;
      r.dynamic_bytes = t_max * model;
      break;
  }
  r.peak_bytes = r.weight_bytes + r.opt_state_bytes + r.dynamic_bytes;
  return r;
}

}  // namespace

MemoryReport PeakMemoryFt(const ArchSpec& arch, MemKind kind,
                          PrecisionMode precision, double batch,
                          double seq_len) {
  return Compose(arch, kind, precision, batch, seq_len,
                 [&](std::size_t l) { return arch.layers[l].params; });
}

MemoryReport PeakMemoryLora(const ArchSpec& arch, MemKind kind,
                            PrecisionMode precision, double batch,
                            double seq_len) {
  if (!arch.has_adapter) {
    throw InvalidArgument("architecture '" + arch.name +
                          "' has no adapter description");
  }
  return Compose(arch, kind, precision, batch, seq_len,
                 [&](std::size_t l) { return arch.layers[l].adapter_params; });
}

std::optional<double> CrossoverKnee(const ArchSpec& arch, double batch) {
  std::optional<double> knee;
  for (const auto& layer : arch.layers) {
    if (layer.act_c1 <= 0.0) continue;
    const double length = (layer.params - layer.act_c0) / (layer.act_c1 * batch);
    if (!knee || length < *knee) knee = length;
  }
  if (knee && *knee < 0.0) knee = 0.0;
  return knee;
}

std::optional<double> ActivationOvertake(const ArchSpec& arch, double batch) {
  double c0 = 0.0, c1 = 0.0;
  for (const auto& layer : arch.layers) {
    c0 += layer.act_c0;
    c1 += layer.act_c1;
  }
  if (c1 <= 0.0) return std::nullopt;
  return std::max(0.0, (arch.total_params() - c0) / (c1 * batch));
}

SeqLenSweep SweepSeqLen(const ArchSpec& arch, const std::vector<MemKind>& kinds,
                        const std::vector<double>& lengths,
                        PrecisionMode precision, double batch) {
  if (lengths.empty()) throw InvalidArgument("sequence-length sweep is empty");
  if (kinds.empty()) throw InvalidArgument("sweep needs at least one kind");
  SeqLenSweep out;
  out.kinds = kinds;
  out.lengths = lengths;
  for (MemKind kind : kinds) {
    std::vector<double> row;
    row.reserve(lengths.size());
    for (double length : lengths) {
      row.push_back(
          PeakMemoryFt(arch, kind, precision, batch, length).peak_bytes);
    }
    out.peak_bytes.push_back(std::move(row));
  }
  out.knee_length = CrossoverKnee(arch, batch);
  out.overtake_length = ActivationOvertake(arch, batch);
  return out;
}

MemKind MemoryKindFor(OptimizerKind kind, Representation representation) {
  switch (kind) {
    case OptimizerKind::kZoSgd:
    case OptimizerKind::kZoSgdSign:
    case OptimizerKind::kZoSgdCons:
      return representation == Representation::kImplicit
                 ? MemKind::kZoSgd
                 : MemKind::kVanillaZoSgd;
    case OptimizerKind::kZoSgdMmt:
      return MemKind::kZoSgdMmt;
    case OptimizerKind::kZoAdam:
      return MemKind::kZoAdam;
    case OptimizerKind::kForwardGrad:
      return MemKind::kForwardGrad;
    case OptimizerKind::kFoSgd:
      return MemKind::kFoSgd;
    case OptimizerKind::kFoAdam:
      return MemKind::kFoAdam;
  }
  return MemKind::kZoSgd;
}

}  // namespace zoopt
