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
#include <limits>
#include <vector>

#include "zoopt/core.hpp"
#include "zoopt/estimators.hpp"
#include "zoopt/tasks/quadratic.hpp"

namespace zoopt {
namespace {

LayerPartition ThreeLayers() {
  return LayerPartition::FromLengths({{"a", 4}, {"b", 9}, {"c", 3}});
}

AffineTask MakeAffine(double offset = 0.0) {
  const auto p = ThreeLayers();
  return AffineTask(GaussianVector(123, p.dim()), offset, p);
}

RgeConfig Cfg(int q, Representation rep, double mu = 1e-3) {
  RgeConfig cfg;
  cfg.q = q;
  cfg.mu = mu;
  cfg.representation = rep;
  return cfg;
}

void ExpectBitwise(const Vector& a, const Vector& b) {
  ASSERT_EQ(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i) EXPECT_EQ(a(i), b(i)) << "index " << i;
}

TEST(RgeTest, AffineMatchesForwardGradBitwiseAtOrigin) {
  const AffineTask f = MakeAffine();
  const SeedStream stream(9);
  for (int q : {1, 3}) {
    for (auto rep : {Representation::kDense, Representation::kImplicit}) {
      ParamVector x(Vector::Zero(f.dim()), f.partition());
      const auto rge = RgeEstimate(f, x, Cfg(q, rep, 0.0009765625), stream, 5,
                                   {});
      const auto fg = ForwardGradEstimate(f, x, q, stream, 5, {}, rep);
      ExpectBitwise(Materialize(rge, f.partition()),
                    Materialize(fg, f.partition()));
    }
  }
}

TEST(RgeTest, AffineMatchesForwardGradAnywhere) {
  const AffineTask f = MakeAffine(3.5);
  const SeedStream stream(1);
  for (double mu : {1e-6, 1e-3, 0.1, 10.0}) {
    ParamVector x(GaussianVector(7, f.dim()), f.partition());
    const Vector rge = Materialize(
        RgeEstimate(f, x, Cfg(2, Representation::kDense, mu), stream, 0, {}),
        f.partition());
    const Vector fg =
        Materialize(ForwardGradEstimate(f, x, 2, stream, 0, {}), f.partition());
    EXPECT_LE((rge - fg).cwiseAbs().maxCoeff(),
              1e-9 * std::max(1.0, fg.cwiseAbs().maxCoeff()))
        << "mu " << mu;
  }
}

TEST(RgeTest, QuadraticSlopeIsDirectionalDerivative) {
  const auto f = QuadraticTask::Make(20, 50.0, 3);
  const SeedStream stream(4);
  ParamVector x(GaussianVector(5, f.dim()), f.partition());
  const Vector grad = f.Grad(x.values(), {});
  const auto est =
      RgeEstimate(f, x, Cfg(4, Representation::kImplicit), stream, 2, {});
  const auto& terms = est.implicit().terms;
  ASSERT_EQ(terms.size(), 4u);
  for (const auto& term : terms) {
    Vector u(f.dim());
    for (std::size_t l = 0; l < f.partition().size(); ++l) {
      const auto& layer = f.partition()[l];
      FillDirection(stream, term.key, l, nullptr,
                    {u.data() + layer.offset,
                     static_cast<std::size_t>(layer.length)});
    }
    const double exact = u.dot(grad);
    EXPECT_NEAR(term.coeff * 4, exact, 1e-8 * std::abs(exact));
  }
}

TEST(RgeTest, UsesExactlyTwoQEvaluations) {
  const auto f = QuadraticTask::Make(10, 5.0, 0);
  CountingObjective counted(f);
  ParamVector x = MakeParams(f, 0);
  for (int q : {1, 2, 5}) {
    counted.Reset();
    RgeEstimate(counted, x, Cfg(q, Representation::kImplicit), SeedStream(0),
                0, {});
    EXPECT_EQ(counted.counts().evals, static_cast<std::uint64_t>(2 * q));
    EXPECT_EQ(counted.counts().total(), static_cast<std::uint64_t>(2 * q));
  }
}

TEST(RgeTest, RestoresParameters) {
  const auto f = QuadraticTask::Make(30, 10.0, 2);
  ParamVector x(GaussianVector(17, f.dim()), f.partition());
  const Vector before = x.values();
  const double mu = 1e-3;
  const SeedStream stream(6);
  RgeEstimate(f, x, Cfg(1, Representation::kImplicit, mu), stream, 9, {});
  Vector u(f.dim());
  FillDirection(stream, {9, 0}, 0, nullptr,
                {u.data(), static_cast<std::size_t>(u.size())});
  for (Index i = 0; i < before.size(); ++i) {
    const double reach = std::abs(before(i)) + 2 * mu * std::abs(u(i));
    const double ulp = std::nextafter(reach, INFINITY) - reach;
    EXPECT_LE(std::abs(x.values()(i) - before(i)), 2 * ulp) << i;
  }
}

class NanAbove : public Objective {
 public:
  explicit NanAbove(double limit) : limit_(limit) {}
  const LayerPartition& partition() const override { return p_; }
  Capabilities capabilities() const override { return {}; }
  double Eval(const Vector& x, const BatchKey&) const override {
    return x(0) > limit_ ? std::numeric_limits<double>::quiet_NaN()
                         : x.squaredNorm();
  }

 private:
  double limit_;
  LayerPartition p_ = LayerPartition::Single(5);
};

TEST(RgeTest, NonFiniteLossRestoresAndThrows) {
  for (auto rep : {Representation::kDense, Representation::kImplicit}) {
    const NanAbove f(-1.0);
    ParamVector x(Vector::Zero(5), f.partition());
    EXPECT_THROW(RgeEstimate(f, x, Cfg(1, rep), SeedStream(0), 0, {}),
                 NonFiniteLoss);
    EXPECT_LE(x.values().cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(MaterializeTest, DenseIsReturnedAsIs) {
  const Vector v = GaussianVector(1, 16);
  ExpectBitwise(Materialize(GradEstimate::Dense(v), ThreeLayers()), v);
}

TEST(MaterializeTest, SingleTermIsScaledDirection) {
  const SeedStream stream(12);
  const auto est = GradEstimate::FromTerms(stream, {{{3, 0}, 2.0, {}}});
  const auto p = ThreeLayers();
  const Vector m = Materialize(est, p);
  for (std::size_t l = 0; l < p.size(); ++l) {
    std::vector<double> z(p[l].length);
    FillDirection(stream, {3, 0}, l, nullptr, z);
    for (Index i = 0; i < p[l].length; ++i) {
      EXPECT_EQ(m(p[l].offset + i), 2.0 * z[i]);
    }
  }
}

TEST(MaterializeTest, ImplicitEqualsDenseBitwise) {
  const auto f = QuadraticTask::Make(
      QuadraticOptions{24, 20.0, 1, 3, Rotation::kGlobal});
  const SeedStream stream(77);
  const std::size_t support[] = {0, 2};
  const MaskSpec mask =
      SampleSparseMask(stream, 4, f.partition(), {0.5, 0.2, 0.0});
  for (int q : {1, 4}) {
    ParamVector xd(GaussianVector(3, f.dim()), f.partition());
    ParamVector xi = xd;
    const auto dense = RgeEstimate(f, xd, Cfg(q, Representation::kDense),
                                   stream, 4, {}, &mask, support);
    const auto imp = RgeEstimate(f, xi, Cfg(q, Representation::kImplicit),
                                 stream, 4, {}, &mask, support);
    ASSERT_TRUE(dense.is_dense());
    ASSERT_FALSE(imp.is_dense());
    EXPECT_EQ(imp.implicit().terms.size(), static_cast<std::size_t>(q));
    ExpectBitwise(Materialize(imp, f.partition()), dense.dense());
    ExpectBitwise(xi.values(), xd.values());
  }
}

TEST(MaterializeTest, ForEachLayerMatchesMaterialize) {
  const auto f = QuadraticTask::Make(
      QuadraticOptions{30, 5.0, 0, 4, Rotation::kGlobal});
  ParamVector x(GaussianVector(2, f.dim()), f.partition());
  const auto est =
      RgeEstimate(f, x, Cfg(3, Representation::kImplicit), SeedStream(1), 0, {});
  const Vector full = Materialize(est, f.partition());
  ResetScratchPeak();
  est.ForEachLayer(f.partition(), [&](std::size_t l, std::span<const double> g) {
    const auto& layer = f.partition()[l];
    for (Index i = 0; i < layer.length; ++i) {
      EXPECT_EQ(g[i], full(layer.offset + i));
    }
  });
  EXPECT_LE(CurrentScratchStats().peak, f.partition().max_length());
}

TEST(MaterializeTest, ImplicitEstimateAllocatesNoScratch) {
  const auto f = QuadraticTask::Make(
      QuadraticOptions{40, 5.0, 0, 4, Rotation::kGlobal});
  ParamVector x = MakeParams(f, 0);
  ResetScratchPeak();
  RgeEstimate(f, x, Cfg(4, Representation::kImplicit), SeedStream(0), 0, {});
  EXPECT_EQ(CurrentScratchStats().peak, 0);
  RgeEstimate(f, x, Cfg(4, Representation::kDense), SeedStream(0), 0, {});
  EXPECT_GE(CurrentScratchStats().peak, f.dim());
}

TEST(BlockwiseTest, SingleBlockEqualsRge) {
  const auto f = QuadraticTask::Make(
      QuadraticOptions{12, 4.0, 0, 3, Rotation::kGlobal});
  for (auto rep : {Representation::kDense, Representation::kImplicit}) {
    ParamVector a(GaussianVector(4, f.dim()), f.partition());
    ParamVector b = a;
    RgeConfig cfg = Cfg(1, rep);
    const auto full = RgeEstimate(f, a, cfg, SeedStream(3), 8, {});
    cfg.blocks = BlockPartition::Contiguous(3, 1);
    const auto block = RgeEstimate(f, b, cfg, SeedStream(3), 8, {});
    ExpectBitwise(Materialize(block, f.partition()),
                  Materialize(full, f.partition()));
  }
}

TEST(BlockwiseTest, PerCoordinateBlocksRecoverPartialSlopes) {
  const Index d = 6;
  const auto base = QuadraticTask::Make(d, 3.0, 2);
  std::vector<std::pair<std::string, Index>> lengths;
  for (Index i = 0; i < d; ++i) lengths.push_back({"c" + std::to_string(i), 1});
  const QuadraticTask f(base.a(), base.x_star(),
                        LayerPartition::FromLengths(lengths));
  ParamVector x(GaussianVector(8, d), f.partition());
  const Vector grad = f.Grad(x.values(), {});
  RgeConfig cfg = Cfg(1, Representation::kImplicit, 1e-4);
  cfg.blocks = BlockPartition::Contiguous(d, d);
  CountingObjective counted(f);
  const auto est = RgeEstimate(counted, x, cfg, SeedStream(2), 0, {});
  EXPECT_EQ(counted.counts().evals, static_cast<std::uint64_t>(2 * d));
  const Vector g = Materialize(est, f.partition());
  for (Index i = 0; i < d; ++i) {
    const auto& term = est.implicit().terms[i];
    double u = 0.0;
    FillDirection(SeedStream(2), term.key, i, nullptr, {&u, 1});
    EXPECT_NEAR(term.coeff, u * grad(i), 1e-8 * std::abs(u * grad(i)));
    EXPECT_NEAR(g(i), grad(i) * u * u, 1e-8 * std::abs(grad(i) * u * u));
  }
}

TEST(BlockwiseTest, PartitionValidation) {
  EXPECT_THROW((BlockPartition{{{0}, {0, 1}}}.Validate(2)), InvalidArgument);
  EXPECT_THROW((BlockPartition{{{0}}}.Validate(2)), InvalidArgument);
  EXPECT_THROW((BlockPartition{{{0}, {2}}}.Validate(2)), InvalidArgument);
  EXPECT_NO_THROW((BlockPartition{{{1}, {0}}}.Validate(2)));
  const auto c = BlockPartition::Contiguous(5, 2);
  ASSERT_EQ(c.count(), 2u);
  EXPECT_EQ(c.blocks[0].size() + c.blocks[1].size(), 5u);
  EXPECT_THROW(BlockPartition::Contiguous(2, 3), InvalidArgument);
}

// With one independent Gaussian direction per block, the block-wise
// estimator's error is sum_b (d_b + 1) |g_b|^2, while full RGE with q = p
// directions has (d + 1) |g|^2 / p. Both closed forms are checked here.
TEST(BlockwiseTest, MeanSquaredErrorMatchesClosedForms) {
  const Index d = 100;
  const std::size_t p = 4;
  const auto f =
      QuadraticTask::Make(QuadraticOptions{d, 10.0, 5, p, Rotation::kGlobal});
  ParamVector x(GaussianVector(21, d), f.partition());
  const Vector grad = f.Grad(x.values(), {});
  double block_expected = 0.0;
  for (const auto& layer : f.partition()) {
    block_expected += (layer.length + 1) *
                      grad.segment(layer.offset, layer.length).squaredNorm();
  }
  const double full_expected = (d + 1) * grad.squaredNorm() / p;

  const int trials = 10000;
  RgeConfig block_cfg = Cfg(1, Representation::kImplicit);
  block_cfg.blocks = BlockPartition::Contiguous(p, p);
  const RgeConfig full_cfg = Cfg(static_cast<int>(p), Representation::kImplicit);
  double block_mse = 0.0;
  double full_mse = 0.0;
  const SeedStream stream(31);
  for (int t = 0; t < trials; ++t) {
    block_mse += (Materialize(RgeEstimate(f, x, block_cfg, stream, t, {}),
                              f.partition()) -
                  grad)
                     .squaredNorm();
    full_mse += (Materialize(RgeEstimate(f, x, full_cfg, stream, t, {}),
                             f.partition()) -
                 grad)
                    .squaredNorm();
  }
  block_mse /= trials;
  full_mse /= trials;
  EXPECT_NEAR(block_mse / block_expected, 1.0, 0.05);
  EXPECT_NEAR(full_mse / full_expected, 1.0, 0.05);
}

TEST(ForwardGradTest, NeedsJvp) {
  const NanAbove f(1.0);
  ParamVector x(Vector::Zero(5), f.partition());
  EXPECT_THROW(ForwardGradEstimate(f, x, 1, SeedStream(0), 0, {}),
               CapabilityMissing);
}

TEST(ForwardGradTest, UnbiasedOnQuadratic) {
  const auto f = QuadraticTask::Make(10, 10.0, 1);
  const ParamVector x(GaussianVector(2, 10), f.partition());
  const Vector grad = f.Grad(x.values(), {});
  const std::size_t n = 20000;
  const auto m = EstimateMomentsMc(
      [&](std::uint64_t i) {
        return Materialize(ForwardGradEstimate(f, x, 1, SeedStream(5), i, {}),
                           f.partition());
      },
      n);
  for (Index i = 0; i < 10; ++i) {
    const double se = std::sqrt(m.variance(i) / n);
    EXPECT_LE(std::abs(m.mean(i) - grad(i)), 4 * se) << i;
  }
}

TEST(ForwardGradTest, VarianceHalvesWithQ) {
  const auto f = QuadraticTask::Make(10, 10.0, 1);
  const ParamVector x(GaussianVector(2, 10), f.partition());
  auto variance = [&](int q) {
    return EstimateMomentsMc(
               [&](std::uint64_t i) {
                 return Materialize(
                     ForwardGradEstimate(f, x, q, SeedStream(9), i, {}),
                     f.partition());
               },
               10000)
        .total_variance;
  };
  const double ratio = variance(2) / variance(1);
  EXPECT_GT(ratio, 0.4);
  EXPECT_LT(ratio, 0.6);
}

TEST(RgeTest, VarianceHalvesWithQ) {
  const auto f = QuadraticTask::Make(10, 10.0, 1);
  ParamVector x(GaussianVector(2, 10), f.partition());
  auto variance = [&](int q) {
    return EstimateMomentsMc(
               [&](std::uint64_t i) {
                 return Materialize(
                     RgeEstimate(f, x, Cfg(q, Representation::kImplicit),
                                 SeedStream(10), i, {}),
                     f.partition());
               },
               10000)
        .total_variance;
  };
  const double ratio = variance(2) / variance(1);
  EXPECT_GT(ratio, 0.4);
  EXPECT_LT(ratio, 0.6);
}

TEST(MomentsTest, DeterministicEstimatorHasZeroVariance) {
  const auto f = QuadraticTask::Make(5, 2.0, 0);
  const Vector x = Vector::Ones(5);
  const auto m = EstimateMomentsMc(
      [&](std::uint64_t) { return f.Grad(x, {}); }, 50);
  EXPECT_EQ(m.total_variance, 0.0);
  EXPECT_TRUE(m.mean.isApprox(f.Grad(x, {})));
  EXPECT_THROW(EstimateMomentsMc([&](std::uint64_t) { return x; }, 1),
               InvalidArgument);
}

TEST(SparsityTest, ZeroRatioPrunesNothing) {
  ParamVector x(GaussianVector(1, 16), ThreeLayers());
  for (double r : SparsityRatiosByMagnitude(x, 0.0)) EXPECT_EQ(r, 0.0);
}

TEST(SparsityTest, EqualMagnitudesSplitEvenly) {
  ParamVector x(Vector::Constant(16, -2.0), ThreeLayers());
  for (double r : SparsityRatiosByMagnitude(x, 0.5)) EXPECT_DOUBLE_EQ(r, 0.5);
}

TEST(SparsityTest, TwoLayerQuantile) {
  Vector v(8);
  v << 1, -2, 3, 4, 5, 6, -7, 8;
  ParamVector x(v, LayerPartition::FromLengths({{"a", 4}, {"b", 4}}));
  const auto r = SparsityRatiosByMagnitude(x, 0.5);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 0.0);
}

TEST(SparsityTest, WeightedMeanEqualsGlobalRatio) {
  const auto p = LayerPartition::FromLengths({{"a", 37}, {"b", 100}, {"c", 13}});
  Vector v = GaussianVector(4, p.dim());
  v.segment(37, 100) *= 3.0;
  ParamVector x(v, p);
  for (double g : {0.1, 0.5, 0.9}) {
    const auto r = SparsityRatiosByMagnitude(x, g);
    double pruned = 0.0;
    for (std::size_t l = 0; l < p.size(); ++l) {
      EXPECT_GE(r[l], 0.0);
      EXPECT_LE(r[l], 1.0);
      pruned += r[l] * p[l].length;
    }
    EXPECT_NEAR(pruned / p.dim(), g, 1e-6);
  }
  EXPECT_THROW(SparsityRatiosByMagnitude(x, 1.0), InvalidArgument);
}

TEST(SparseMaskTest, ZeroRatioIsAllOnes) {
  const auto p = ThreeLayers();
  const auto mask = SampleSparseMask(SeedStream(0), 0, p, {0.0, 0.0, 0.0});
  for (auto b : MaterializeMask(mask, p)) EXPECT_EQ(b, 1);
}

TEST(SparseMaskTest, RealizedSparsityWithinBinomialBound) {
  const Index n = 100000;
  const auto p = LayerPartition::FromLengths({{"big", n}, {"small", 10}});
  const auto mask = SampleSparseMask(SeedStream(3), 7, p, {0.9, 0.0});
  const auto bits = MaterializeMask(mask, p);
  double zeros = 0;
  for (Index i = 0; i < n; ++i) zeros += bits[i] == 0;
  EXPECT_LE(std::abs(zeros / n - 0.9), 3 * std::sqrt(0.9 * 0.1 / n));
  EXPECT_EQ(MaterializeMask(mask, p), bits);
  const auto other = SampleSparseMask(SeedStream(3), 8, p, {0.9, 0.0});
  EXPECT_NE(MaterializeMask(other, p), bits);
}

TEST(SparseMaskTest, MaskedCoordinatesGetNoUpdate) {
  const auto f = QuadraticTask::Make(
      QuadraticOptions{30, 5.0, 0, 3, Rotation::kGlobal});
  ParamVector x(GaussianVector(1, 30), f.partition());
  const auto mask =
      SampleSparseMask(SeedStream(2), 0, f.partition(), {0.7, 0.7, 0.7});
  const auto bits = MaterializeMask(mask, f.partition());
  const Vector g = Materialize(
      RgeEstimate(f, x, Cfg(2, Representation::kImplicit), SeedStream(2), 0, {},
                  &mask),
      f.partition());
  for (Index i = 0; i < 30; ++i) {
    if (bits[i] == 0) EXPECT_EQ(g(i), 0.0);
  }
  EXPECT_THROW(SampleSparseMask(SeedStream(0), 0, f.partition(), {0.5}),
               DimensionMismatch);
}

TEST(RgeConfigTest, Validation) {
  RgeConfig cfg;
  cfg.mu = 0.0;
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
  cfg.mu = 1e-3;
  cfg.q = 0;
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
  cfg.q = 1;
  cfg.sparsity = SparsityConfig{1.0};
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
}

}  // namespace
}  // namespace zoopt
