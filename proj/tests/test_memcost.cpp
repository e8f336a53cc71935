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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "zoopt/memcost.hpp"
#include "zoopt/optimizers.hpp"
#include "zoopt/tasks/quadratic.hpp"

namespace zoopt {
namespace {

ArchSpec Preset() {
  return ArchSpec::Load(std::string(ZOOPT_SOURCE_DIR) +
                        "/presets/opt13b-multirc.json");
}

double Gb(const ArchSpec& arch, MemKind kind, PrecisionMode mode,
          bool lora = false) {
  const double batch = arch.nominal_batch;
  const double len = arch.nominal_seq_len;
  const MemoryReport r = lora ? PeakMemoryLora(arch, kind, mode, batch, len)
                              : PeakMemoryFt(arch, kind, mode, batch, len);
  return r.peak_bytes / kBytesPerGB;
}

struct Row {
  MemKind kind;
  double modeled;
  double empirical;
};

TEST(PresetTest, CalibratedAggregates) {
  const ArchSpec arch = Preset();
  EXPECT_NEAR(arch.total_params() * arch.bytes_full / kBytesPerGB, 48.0, 1e-9);
  double sum_max = 0.0;
  double max_x = 0.0;
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const double a = arch.activation(l, 1, 400);
    sum_max += std::max(a, arch.layers[l].params);
    max_x = std::max(max_x, arch.layers[l].params);
  }
  EXPECT_NEAR(sum_max * 4 / kBytesPerGB, 49.0, 1e-9);
  EXPECT_NEAR(max_x * 4 / kBytesPerGB, 3.0, 1e-9);
}

TEST(PresetTest, FullPrecisionRows) {
  const ArchSpec arch = Preset();
  const std::vector<Row> rows = {
      {MemKind::kFoSgd, 97, 97},          {MemKind::kFoAdamNoForeach, 193, 195},
      {MemKind::kFoAdam, 241, 239},       {MemKind::kForwardGrad, 100, 103},
      {MemKind::kVanillaZoSgd, 96, 96},   {MemKind::kZoSgd, 51, 51},
      {MemKind::kZoSgdMmt, 99, 100},      {MemKind::kZoAdam, 147, 151},
  };
  for (const Row& r : rows) {
    const double gb = Gb(arch, r.kind, PrecisionMode::kFull);
    EXPECT_NEAR(gb, r.modeled, 1e-9) << ToString(r.kind);
    EXPECT_LE(std::abs(gb - r.empirical) / r.empirical, 0.05)
        << ToString(r.kind);
  }
}

TEST(PresetTest, HalfPrecisionRows) {
  const ArchSpec arch = Preset();
  const std::vector<Row> f16 = {{MemKind::kZoSgd, 25.5, 25},
                                {MemKind::kZoSgdMmt, 49.5, 49},
                                {MemKind::kZoAdam, 73.5, 74}};
  for (const Row& r : f16) {
    const double gb = Gb(arch, r.kind, PrecisionMode::kF16);
    EXPECT_NEAR(gb, r.modeled, 1e-9) << ToString(r.kind);
    EXPECT_LE(std::abs(gb - r.empirical) / r.empirical, 0.05);
    EXPECT_DOUBLE_EQ(gb, 0.5 * Gb(arch, r.kind, PrecisionMode::kFull));
  }
  EXPECT_NEAR(Gb(arch, MemKind::kFoSgd, PrecisionMode::kFP16), 96.0, 1e-9);
  EXPECT_NEAR(Gb(arch, MemKind::kFoAdam, PrecisionMode::kFP16), 240.0, 1e-9);
}

TEST(PresetTest, LoraRows) {
  const ArchSpec arch = Preset();
  const std::vector<Row> rows = {
      {MemKind::kFoSgd, 74, 69},          {MemKind::kFoAdamNoForeach, 74.1, 69},
      {MemKind::kFoAdam, 74.16, 69},      {MemKind::kForwardGrad, 52.05, 55},
      {MemKind::kVanillaZoSgd, 48.05, 52}, {MemKind::kZoSgd, 48.0, 52},
      {MemKind::kZoSgdMmt, 48.05, 52},    {MemKind::kZoAdam, 48.1, 52},
  };
  for (const Row& r : rows) {
    const double gb = Gb(arch, r.kind, PrecisionMode::kFull, true);
    EXPECT_NEAR(gb, r.modeled, 0.01) << ToString(r.kind);
    EXPECT_LE(std::abs(gb - r.empirical) / r.empirical, 0.10)
        << ToString(r.kind);
  }
  const std::vector<Row> fp16 = {{MemKind::kFoSgd, 85, 92},
                                 {MemKind::kFoAdam, 85.16, 93}};
  for (const Row& r : fp16) {
    const double gb = Gb(arch, r.kind, PrecisionMode::kFP16, true);
    EXPECT_NEAR(gb, r.modeled, 0.01);
    EXPECT_LE(std::abs(gb - r.empirical) / r.empirical, 0.10);
  }
  for (auto kind : {MemKind::kZoSgd, MemKind::kZoSgdMmt, MemKind::kZoAdam}) {
    const double gb = Gb(arch, kind, PrecisionMode::kF16, true);
    EXPECT_NEAR(gb, 24.0, 0.06);
    EXPECT_LE(std::abs(gb - 25.0) / 25.0, 0.05);
  }
}

TEST(PresetTest, EmpiricalOrdering) {
  const ArchSpec arch = Preset();
  const std::vector<MemKind> order = {
      MemKind::kZoSgd,    MemKind::kVanillaZoSgd,    MemKind::kFoSgd,
      MemKind::kZoSgdMmt, MemKind::kForwardGrad,     MemKind::kZoAdam,
      MemKind::kFoAdamNoForeach, MemKind::kFoAdam};
  for (std::size_t i = 1; i < order.size(); ++i) {
    EXPECT_LT(Gb(arch, order[i - 1], PrecisionMode::kFull),
              Gb(arch, order[i], PrecisionMode::kFull))
        << ToString(order[i - 1]) << " vs " << ToString(order[i]);
  }
}

TEST(PresetTest, SeedReplaySaving) {
  const ArchSpec arch = Preset();
  const auto v = PeakMemoryFt(arch, MemKind::kVanillaZoSgd,
                              PrecisionMode::kFull, 1, 400);
  const auto z = PeakMemoryFt(arch, MemKind::kZoSgd, PrecisionMode::kFull, 1,
                              400);
  EXPECT_DOUBLE_EQ(v.peak_bytes - z.peak_bytes, (48.0 - 3.0) * kBytesPerGB);
}

ArchSpec Tiny(std::vector<LayerCost> layers) {
  ArchSpec arch;
  arch.name = "tiny";
  arch.layers = std::move(layers);
  for (const auto& l : arch.layers) {
    if (l.adapter_params > 0) arch.has_adapter = true;
  }
  return arch;
}

TEST(MemoryReportTest, PartsAddUp) {
  const ArchSpec arch = Preset();
  for (MemKind kind : AllMemKinds()) {
    for (auto mode : {PrecisionMode::kFull, PrecisionMode::kF16,
                      PrecisionMode::kFP16}) {
      if (!IsCompatible(kind, mode)) {
        EXPECT_THROW(PeakMemoryFt(arch, kind, mode, 1, 400),
                     IncompatiblePrecision);
        continue;
      }
      const auto r = PeakMemoryFt(arch, kind, mode, 1, 400);
      EXPECT_EQ(r.peak_bytes,
                r.weight_bytes + r.opt_state_bytes + r.dynamic_bytes);
      EXPECT_GE(r.dynamic_bytes, 0.0);
    }
  }
}

TEST(MemoryReportTest, ZeroActivationsCollapseToTwiceParams) {
  const ArchSpec arch = Tiny({{"only", 1000, 0, 0}});
  const auto r = PeakMemoryFt(arch, MemKind::kFoSgd, PrecisionMode::kFull, 8,
                              128);
  EXPECT_DOUBLE_EQ(r.peak_bytes, 2 * 1000 * 4.0);
}

TEST(MemoryReportTest, EmptyAdapterKeepsActivations) {
  const ArchSpec arch =
      Tiny({{"a", 100, 10, 1, 0}, {"b", 200, 0, 3, 0}});
  ArchSpec with_adapter = arch;
  with_adapter.has_adapter = true;
  const auto r = PeakMemoryLora(with_adapter, MemKind::kFoSgd,
                                PrecisionMode::kFull, 2, 5);
  const double acts = (10 + 1 * 2 * 5) + (3 * 2 * 5);
  EXPECT_DOUBLE_EQ(r.peak_bytes, (300 + acts) * 4.0);
  EXPECT_THROW(
      PeakMemoryLora(arch, MemKind::kFoSgd, PrecisionMode::kFull, 2, 5),
      InvalidArgument);
}

TEST(MemoryReportTest, DeterministicAcrossCalls) {
  const ArchSpec arch = Preset();
  const auto a = PeakMemoryFt(arch, MemKind::kZoAdam, PrecisionMode::kFull, 3,
                              77);
  const auto b = PeakMemoryFt(arch, MemKind::kZoAdam, PrecisionMode::kFull, 3,
                              77);
  EXPECT_EQ(a.peak_bytes, b.peak_bytes);
  EXPECT_EQ(a.dynamic_bytes, b.dynamic_bytes);
}

TEST(SweepTest, ZoFlatFoKneeThenRising) {
  const ArchSpec arch = Preset();
  std::vector<double> lengths;
  for (double l = 50; l <= 1200; l += 50) lengths.push_back(l);
  const auto sweep = SweepSeqLen(arch, {MemKind::kZoSgd, MemKind::kFoSgd},
                                 lengths, PrecisionMode::kFull, 1);
  ASSERT_TRUE(sweep.knee_length);
  // Hand value: min over layers of params / (act_c1 * batch); the head has
  // 750e6 params and 2.5e6 activation elements per token.
  EXPECT_EQ(*sweep.knee_length, 750e6 / 2.5e6);
  const auto& zo = sweep.peak_bytes[0];
  const auto& fo = sweep.peak_bytes[1];
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    EXPECT_EQ(zo[i], zo[0]);
    if (lengths[i] <= *sweep.knee_length) {
      EXPECT_EQ(fo[i], fo[0]) << lengths[i];
    } else {
      EXPECT_GT(fo[i], fo[i - 1]) << lengths[i];
    }
  }
  ASSERT_TRUE(sweep.overtake_length);
  double params = 0.0;
  double c1 = 0.0;
  for (const auto& l : arch.layers) {
    params += l.params;
    c1 += l.act_c1;
  }
  EXPECT_DOUBLE_EQ(*sweep.overtake_length, params / c1);
}

TEST(SweepTest, DoublingBatchDoublesActivationSlope) {
  const ArchSpec arch = Tiny({{"a", 10, 7, 3}, {"b", 20, 0, 5}});
  for (std::size_t l = 0; l < 2; ++l) {
    const double c0 = arch.activation(l, 0, 0);
    EXPECT_DOUBLE_EQ(arch.activation(l, 4, 9) - c0,
                     2 * (arch.activation(l, 2, 9) - c0));
  }
  EXPECT_EQ(*CrossoverKnee(arch, 1), std::min((10 - 7) / 3.0, 20 / 5.0));
  EXPECT_EQ(*CrossoverKnee(arch, 2), std::min((10 - 7) / 6.0, 20 / 10.0));
}

TEST(ArchSpecTest, JsonValidation) {
  EXPECT_NO_THROW(ArchSpec::FromJsonText(
      R"({"name":"t","layers":[{"name":"a","params":3,"act_c0":0,"act_c1":1}]})"));
  EXPECT_THROW(ArchSpec::FromJsonText(
                   R"({"name":"t","layers":[{"name":"a","params":3,"act_c0":0,"act_c1":1,"bogus":1}]})"),
               ConfigError);
  EXPECT_THROW(ArchSpec::FromJsonText(R"({"name":"t","colour":"red","layers":[]})"),
               ConfigError);
  EXPECT_THROW(ArchSpec::FromJsonText(
                   R"({"name":"t","layers":[{"name":"a","params":-3,"act_c0":0,"act_c1":1}]})"),
               ConfigError);
  EXPECT_THROW(ArchSpec::FromJsonText(
                   R"({"name":"t","layers":[{"name":"a","params":3,"act_c0":0,"act_c1":1}],"adapter_params":[1,2]})"),
               ConfigError);
  EXPECT_THROW(ArchSpec::FromJsonText("{not json"), ConfigError);
  EXPECT_THROW(ArchSpec::Load("/nonexistent/arch.json"), ConfigError);
}

TEST(MemKindTest, NamesAndCompatibility) {
  for (MemKind k : AllMemKinds()) EXPECT_EQ(ParseMemKind(ToString(k)), k);
  EXPECT_EQ(ParseMemKind("zo_sgd_sign"), MemKind::kZoSgd);
  EXPECT_THROW(ParseMemKind("nope"), InvalidArgument);
  EXPECT_TRUE(IsCompatible(MemKind::kZoAdam, PrecisionMode::kF16));
  EXPECT_FALSE(IsCompatible(MemKind::kFoSgd, PrecisionMode::kF16));
  EXPECT_FALSE(IsCompatible(MemKind::kForwardGrad, PrecisionMode::kF16));
  EXPECT_FALSE(IsCompatible(MemKind::kZoSgd, PrecisionMode::kFP16));
  EXPECT_TRUE(IsCompatible(MemKind::kFoAdam, PrecisionMode::kFP16));
  EXPECT_EQ(ParsePrecisionMode("fp16"), PrecisionMode::kFP16);
}

TEST(MemKindTest, OptimizerMapping) {
  EXPECT_EQ(MemoryKindFor(OptimizerKind::kZoSgd, Representation::kImplicit),
            MemKind::kZoSgd);
  EXPECT_EQ(MemoryKindFor(OptimizerKind::kZoSgd, Representation::kDense),
            MemKind::kVanillaZoSgd);
  EXPECT_EQ(MemoryKindFor(OptimizerKind::kZoAdam, Representation::kImplicit),
            MemKind::kZoAdam);
  EXPECT_EQ(MemoryKindFor(OptimizerKind::kFoAdam, Representation::kDense),
            MemKind::kFoAdam);
  EXPECT_EQ(MemoryKindFor(OptimizerKind::kForwardGrad, Representation::kDense),
            MemKind::kForwardGrad);
}

TEST(ArchFromObjectiveTest, MirrorsPartition) {
  const auto task = QuadraticTask::Make(
      QuadraticOptions{12, 3.0, 0, 3, Rotation::kGlobal});
  const ArchSpec arch = ArchFromObjective(task, "quad");
  ASSERT_EQ(arch.layers.size(), 3u);
  EXPECT_EQ(arch.total_params(), 12.0);
  EXPECT_EQ(arch.bytes_full, 8.0);
}

}  // namespace
}  // namespace zoopt
