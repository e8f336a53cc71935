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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "zoopt/estimators.hpp"
#include "zoopt/optimizers.hpp"
#include "zoopt/tasks/quadratic.hpp"
#include "zoopt/trainer.hpp"

namespace zoopt {
namespace {

ParamVector Params(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double e : v) x(i++) = e;
  return ParamVector(x, LayerPartition::Single(x.size()));
}

GradEstimate DenseOf(std::initializer_list<double> v) {
  return GradEstimate::Dense(Params(v).values());
}

HyperParams Lr(double lr) {
  HyperParams hp;
  hp.lr = lr;
  return hp;
}

class SquaredNorm : public Objective {
 public:
  explicit SquaredNorm(Index d) : p_(LayerPartition::Single(d)) {}
  const LayerPartition& partition() const override { return p_; }
  Capabilities capabilities() const override { return {true, false, false}; }
  double Eval(const Vector& x, const BatchKey&) const override {
    return x.squaredNorm();
  }
  Vector Grad(const Vector& x, const BatchKey&) const override {
    return 2 * x;
  }

 private:
  LayerPartition p_;
};

TEST(OptimizerKindTest, NamesRoundTrip) {
  for (auto k : {OptimizerKind::kZoSgd, OptimizerKind::kZoSgdSign,
                 OptimizerKind::kZoSgdMmt, OptimizerKind::kZoSgdCons,
                 OptimizerKind::kZoAdam, OptimizerKind::kForwardGrad,
                 OptimizerKind::kFoSgd, OptimizerKind::kFoAdam}) {
    EXPECT_EQ(ParseOptimizerKind(ToString(k)), k);
  }
  EXPECT_THROW(ParseOptimizerKind("zo_lbfgs"), InvalidArgument);
  EXPECT_TRUE(IsZerothOrder(OptimizerKind::kZoSgdCons));
  EXPECT_FALSE(IsZerothOrder(OptimizerKind::kForwardGrad));
  EXPECT_TRUE(IsFirstOrder(OptimizerKind::kFoAdam));
}

TEST(HyperParamsTest, Validation) {
  HyperParams hp;
  EXPECT_NO_THROW(hp.Validate());
  hp.lr = 0;
  EXPECT_THROW(hp.Validate(), InvalidArgument);
  hp = HyperParams{};
  hp.beta1 = 1.0;
  EXPECT_THROW(hp.Validate(), InvalidArgument);
  hp = HyperParams{};
  hp.beta2 = -0.1;
  EXPECT_THROW(hp.Validate(), InvalidArgument);
  hp = HyperParams{};
  hp.eps = 0;
  EXPECT_THROW(hp.Validate(), InvalidArgument);
}

TEST(OptStateTest, BuffersExistOnlyWhenNeeded) {
  const auto sgd = OptState::For(OptimizerKind::kZoSgd, 5);
  EXPECT_FALSE(sgd.m || sgd.v || sgd.v_cap);
  const auto mmt = OptState::For(OptimizerKind::kZoSgdMmt, 5);
  EXPECT_TRUE(mmt.m && !mmt.v && !mmt.v_cap);
  for (auto k : {OptimizerKind::kZoAdam, OptimizerKind::kFoAdam}) {
    const auto adam = OptState::For(k, 5);
    ASSERT_TRUE(adam.m && adam.v && adam.v_cap);
    EXPECT_EQ(adam.v_cap->size(), 5);
  }
}

TEST(ApplyUpdateTest, ZeroEstimateLeavesParamsUnchanged) {
  ParamVector x = Params({1.5, -2.0, 0.25});
  auto state = OptState::For(OptimizerKind::kZoSgd, 3);
  ApplyUpdate(OptimizerKind::kZoSgd, state, x, DenseOf({0, 0, 0}), Lr(0.1));
  EXPECT_EQ(x.values(), Params({1.5, -2.0, 0.25}).values());
  EXPECT_EQ(state.step, 1u);
}

TEST(ApplyUpdateTest, SgdIsRawUpdateBitwise) {
  const Vector g = GaussianVector(3, 50);
  ParamVector x(GaussianVector(4, 50), LayerPartition::Even(50, 3));
  const Vector expected = x.values() - 0.037 * g;
  for (auto k : {OptimizerKind::kZoSgd, OptimizerKind::kFoSgd,
                 OptimizerKind::kForwardGrad}) {
    ParamVector y = x;
    auto state = OptState::For(k, 50);
    ApplyUpdate(k, state, y, GradEstimate::Dense(g), Lr(0.037));
    for (Index i = 0; i < 50; ++i) EXPECT_EQ(y.values()(i), expected(i));
  }
}

TEST(ApplyUpdateTest, SignStepsByLearningRate) {
  ParamVector x = Params({0, 0, 0});
  auto state = OptState::For(OptimizerKind::kZoSgdSign, 3);
  ApplyUpdate(OptimizerKind::kZoSgdSign, state, x, DenseOf({0.3, -7, 0}),
              Lr(0.1));
  EXPECT_EQ(x.values()(0), -0.1);
  EXPECT_EQ(x.values()(1), 0.1);
  EXPECT_EQ(x.values()(2), 0.0);
}

TEST(ApplyUpdateTest, SignOfImplicitEstimateIsTernary) {
  const auto f = QuadraticTask::Make(
      QuadraticOptions{40, 5.0, 0, 4, Rotation::kGlobal});
  ParamVector x(GaussianVector(1, 40), f.partition());
  RgeConfig cfg;
  cfg.q = 3;
  cfg.representation = Representation::kImplicit;
  const auto est = RgeEstimate(f, x, cfg, SeedStream(2), 0, {});
  const Vector before = x.values();
  auto state = OptState::For(OptimizerKind::kZoSgdSign, 40);
  ApplyUpdate(OptimizerKind::kZoSgdSign, state, x, est, Lr(0.5));
  for (Index i = 0; i < 40; ++i) {
    const double after = x.values()(i);
    EXPECT_TRUE(after == before(i) || after == before(i) - 0.5 ||
                after == before(i) + 0.5)
        << i;
  }
}

TEST(ApplyUpdateTest, SlopeSignModeScalesDirections) {
  const auto f = QuadraticTask::Make(12, 5.0, 0);
  ParamVector x(GaussianVector(1, 12), f.partition());
  RgeConfig cfg;
  cfg.q = 2;
  cfg.representation = Representation::kImplicit;
  const SeedStream stream(4);
  const auto est = RgeEstimate(f, x, cfg, stream, 0, {});
  HyperParams hp = Lr(0.1);
  hp.q = 2;
  hp.sign_mode = SignMode::kSlopeTimesDirection;
  Vector expected = x.values();
  for (const auto& term : est.implicit().terms) {
    std::vector<double> u(12);
    FillDirection(stream, term.key, 0, nullptr, u);
    const double s = term.coeff > 0 ? 1.0 : -1.0;
    for (Index i = 0; i < 12; ++i) expected(i) -= 0.1 * (s / 2) * u[i];
  }
  auto state = OptState::For(OptimizerKind::kZoSgdSign, 12);
  ApplyUpdate(OptimizerKind::kZoSgdSign, state, x, est, hp);
  EXPECT_LE((x.values() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(ApplyUpdate(OptimizerKind::kZoSgdSign, state, x,
                           GradEstimate::Dense(Vector::Ones(12)), hp),
               InvalidArgument);
}

TEST(ApplyUpdateTest, MomentumAccumulates) {
  ParamVector x = Params({0, 0});
  auto state = OptState::For(OptimizerKind::kZoSgdMmt, 2);
  HyperParams hp = Lr(1.0);
  hp.beta1 = 0.5;
  ApplyUpdate(OptimizerKind::kZoSgdMmt, state, x, DenseOf({1, -2}), hp);
  ApplyUpdate(OptimizerKind::kZoSgdMmt, state, x, DenseOf({1, -2}), hp);
  // m1 = g, m2 = 1.5 g; x = -(m1 + m2).
  EXPECT_DOUBLE_EQ(x.values()(0), -2.5);
  EXPECT_DOUBLE_EQ(x.values()(1), 5.0);
  EXPECT_DOUBLE_EQ((*state.m)(0), 1.5);
}

TEST(ApplyUpdateTest, AdamFirstStepClosedForm) {
  const double lr = 0.01;
  for (double g : {0.5, -3.0, 1e-4}) {
    ParamVector x = Params({0});
    auto state = OptState::For(OptimizerKind::kZoAdam, 1);
    HyperParams hp = Lr(lr);
    ApplyUpdate(OptimizerKind::kZoAdam, state, x, DenseOf({g}), hp);
    const double m = (1 - 0.9) * g;
    const double v = (1 - 0.999) * g * g;
    EXPECT_DOUBLE_EQ(x.values()(0), -lr * m / (std::sqrt(v) + 1e-8));
  }
}

TEST(ApplyUpdateTest, AdamCapIsNonDecreasing) {
  const Index d = 8;
  ParamVector x(Vector::Zero(d), LayerPartition::Single(d));
  auto state = OptState::For(OptimizerKind::kFoAdam, d);
  Vector prev = Vector::Zero(d);
  for (int t = 0; t < 50; ++t) {
    const Vector g = GaussianVector(t + 100, d) * (t % 7 == 0 ? 10.0 : 0.1);
    ApplyUpdate(OptimizerKind::kFoAdam, state, x, GradEstimate::Dense(g),
                Lr(0.01));
    EXPECT_TRUE((state.v->array() >= 0).all());
    EXPECT_TRUE((state.v_cap->array() >= prev.array()).all());
    prev = *state.v_cap;
  }
}

TEST(ApplyUpdateTest, RejectsBadEstimates) {
  ParamVector x = Params({1, 2, 3});
  auto state = OptState::For(OptimizerKind::kZoSgd, 3);
  EXPECT_THROW(
      ApplyUpdate(OptimizerKind::kZoSgd, state, x, DenseOf({1, 2}), Lr(0.1)),
      DimensionMismatch);
  Vector nan = Vector::Zero(3);
  nan(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(ApplyUpdate(OptimizerKind::kZoSgd, state, x,
                           GradEstimate::Dense(nan), Lr(0.1)),
               NonFiniteUpdate);
  EXPECT_THROW(
      ApplyUpdate(OptimizerKind::kZoSgd, state, x, DenseOf({1e308, 0, 0}),
                  Lr(1e10)),
      NonFiniteUpdate);
  EXPECT_THROW(ApplyUpdate(OptimizerKind::kZoSgdCons, state, x,
                           DenseOf({0, 0, 0}), Lr(0.1)),
               InvalidArgument);
}

TEST(StepConsTest, ChoosesPlusWhenEstimatePointsUphill) {
  const SquaredNorm f(2);
  ParamVector x = Params({1, 0});
  auto state = OptState::For(OptimizerKind::kZoSgdCons, 2);
  const auto out =
      StepCons(f, state, x, DenseOf({-1, 0}), Lr(0.5), BatchKey{});
  EXPECT_EQ(out.choice, ConsChoice::kPlus);
  EXPECT_EQ(out.f_current, 1.0);
  EXPECT_EQ(out.f_chosen, 0.25);
  EXPECT_EQ(x.values()(0), 0.5);
}

TEST(StepConsTest, ZeroEstimateStays) {
  const SquaredNorm f(2);
  ParamVector x = Params({1, -1});
  auto state = OptState::For(OptimizerKind::kZoSgdCons, 2);
  const auto out = StepCons(f, state, x, DenseOf({0, 0}), Lr(0.5), {});
  EXPECT_EQ(out.choice, ConsChoice::kStay);
  EXPECT_EQ(x.values(), Params({1, -1}).values());
}

TEST(StepConsTest, TrueGradientChoosesMinus) {
  const auto f = QuadraticTask::Make(10, 10.0, 0);
  ParamVector x(GaussianVector(3, 10), f.partition());
  auto state = OptState::For(OptimizerKind::kZoSgdCons, 10);
  CountingObjective counted(f);
  const auto out = StepCons(counted, state, x,
                            GradEstimate::Dense(f.Grad(x.values(), {})),
                            Lr(0.01), {});
  EXPECT_EQ(out.choice, ConsChoice::kMinus);
  EXPECT_LT(out.f_chosen, out.f_current);
  EXPECT_EQ(counted.counts().evals, 3u);
  counted.Reset();
  StepCons(counted, state, x, GradEstimate::Dense(Vector::Zero(10)), Lr(0.01),
           {}, f.Eval(x.values(), {}));
  EXPECT_EQ(counted.counts().evals, 2u);
}

TEST(StepConsTest, NonFiniteLossRestores) {
  class Blowup : public Objective {
   public:
    const LayerPartition& partition() const override { return p_; }
    Capabilities capabilities() const override { return {}; }
    double Eval(const Vector& x, const BatchKey&) const override {
      return x(0) > 1.5 ? std::numeric_limits<double>::infinity() : x(0);
    }

   private:
    LayerPartition p_ = LayerPartition::Single(1);
  };
  const Blowup f;
  ParamVector x = Params({1.0});
  auto state = OptState::For(OptimizerKind::kZoSgdCons, 1);
  EXPECT_THROW(StepCons(f, state, x, DenseOf({1.0}), Lr(1.0), {}),
               NonFiniteLoss);
  EXPECT_EQ(x.values()(0), 1.0);
}

TrainOptions Options(OptimizerKind kind, double lr, std::uint64_t iters) {
  TrainOptions o;
  o.kind = kind;
  o.hp.lr = lr;
  o.iterations = iters;
  o.eval_every = iters > 0 ? iters / 4 : 0;
  return o;
}

TEST(TrainTest, ZoSgdConvergesOnQuadratic) {
  const auto f = QuadraticTask::Make(100, 10.0, 0);
  auto o = Options(OptimizerKind::kZoSgd, 2e-3, 20000);
  o.representation = Representation::kImplicit;
  const auto t = Train(f, o);
  ASSERT_FALSE(t.failed) << t.error;
  EXPECT_LT(t.rows.back().train_loss, 1e-3);
}

TEST(TrainTest, FoSgdConvergesLinearly) {
  const auto f = QuadraticTask::Make(100, 10.0, 0);
  const auto t = Train(f, Options(OptimizerKind::kFoSgd, 0.1, 5000));
  ASSERT_FALSE(t.failed);
  EXPECT_LT(t.rows.back().train_loss, 1e-10);
  EXPECT_EQ(t.queries.grads, 5000u);
}

TEST(TrainTest, QueryCountsFollowClosedForms) {
  const auto f = QuadraticTask::Make(
      QuadraticOptions{12, 5.0, 0, 4, Rotation::kGlobal});
  auto o = Options(OptimizerKind::kZoSgd, 1e-3, 100);
  o.hp.q = 3;
  EXPECT_EQ(Train(f, o).queries.evals, 600u);
  o.kind = OptimizerKind::kZoSgdCons;
  EXPECT_EQ(Train(f, o).queries.evals, 100u * (2 * 3 + 3));
  o.kind = OptimizerKind::kForwardGrad;
  const auto fg = Train(f, o).queries;
  EXPECT_EQ(fg.jvps, 300u);
  EXPECT_EQ(fg.evals, 0u);
  o.kind = OptimizerKind::kZoSgd;
  o.blocks = BlockPartition::Contiguous(4, 4);
  EXPECT_EQ(Train(f, o).queries.evals, 800u);
}

TEST(TrainTest, ImplicitAndDenseTrajectoriesAreBitwiseEqual) {
  const auto f = QuadraticTask::Make(
      QuadraticOptions{30, 10.0, 1, 3, Rotation::kGlobal});
  for (auto kind : {OptimizerKind::kZoSgd, OptimizerKind::kZoSgdSign,
                    OptimizerKind::kZoAdam}) {
    auto o = Options(kind, 1e-3, 300);
    o.hp.q = 2;
    o.representation = Representation::kDense;
    const auto dense = Train(f, o);
    o.representation = Representation::kImplicit;
    const auto imp = Train(f, o);
    ASSERT_EQ(dense.final_params.size(), imp.final_params.size());
    for (Index i = 0; i < dense.final_params.size(); ++i) {
      EXPECT_EQ(dense.final_params(i), imp.final_params(i));
    }
  }
}

TEST(TrainTest, ConsNeverIncreasesBatchLoss) {
  const auto f = QuadraticTask::Make(20, 10.0, 2);
  auto o = Options(OptimizerKind::kZoSgdCons, 0.05, 500);
  std::uint64_t calls = 0;
  o.on_cons = [&](std::uint64_t, const ConsOutcome& c) {
    ++calls;
    EXPECT_LE(c.f_chosen, c.f_current);
  };
  const auto t = Train(f, o);
  EXPECT_EQ(calls, 500u);
  EXPECT_EQ(t.cons_violations, 0u);
}

TEST(TrainTest, ZeroIterationsRecordsInitialRow) {
  const auto f = QuadraticTask::Make(5, 2.0, 0);
  const auto t = Train(f, Options(OptimizerKind::kZoSgd, 1e-3, 0));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].step, 0u);
  EXPECT_EQ(t.queries.total(), 0u);
}

TEST(TrainTest, RowsAreOrderedAndQueriesNonDecreasing) {
  const auto f = QuadraticTask::Make(5, 2.0, 0);
  auto o = Options(OptimizerKind::kZoSgd, 1e-3, 103);
  o.eval_every = 10;
  const auto t = Train(f, o);
  ASSERT_EQ(t.rows.size(), 12u);
  EXPECT_EQ(t.rows.back().step, 103u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    EXPECT_GT(t.rows[i].step, t.rows[i - 1].step);
    EXPECT_GE(t.rows[i].cumulative_queries, t.rows[i - 1].cumulative_queries);
  }
}

TEST(TrainTest, DivergenceMarksRunFailed) {
  const auto f = QuadraticTask::Make(10, 10.0, 0);
  const auto t = Train(f, Options(OptimizerKind::kFoSgd, 10.0, 2000));
  EXPECT_TRUE(t.failed);
  EXPECT_FALSE(t.error.empty());
  EXPECT_LT(t.steps_completed, 2000u);
}

TEST(TrainTest, MissingCapabilityIsReported) {
  const SquaredNorm f(3);
  EXPECT_THROW(Train(f, Options(OptimizerKind::kForwardGrad, 0.1, 10)),
               CapabilityMissing);
}

// The angle between a q-sample forward gradient and the true gradient has
// E[tan^2] ~ (d - 1) / q, about 1.7 degrees RMS at d = 10, q = 10^4, so the
// 2 degree bound is asserted on the median of independent estimates.
TEST(ForwardGradTest, AveragedDirectionMatchesGradientAngle) {
  const auto f = QuadraticTask::Make(10, 10.0, 4);
  const ParamVector x(GaussianVector(5, 10), f.partition());
  const Vector grad = f.Grad(x.values(), {});
  std::vector<double> angles;
  for (std::uint64_t step = 0; step < 15; ++step) {
    const Vector g = Materialize(
        ForwardGradEstimate(f, x, 10000, SeedStream(1), step, {}),
        f.partition());
    const double cosine = g.dot(grad) / (g.norm() * grad.norm());
    angles.push_back(std::acos(std::min(1.0, cosine)) * 180.0 / M_PI);
  }
  std::nth_element(angles.begin(), angles.begin() + 7, angles.end());
  EXPECT_LT(angles[7], 2.0);
}

}  // namespace
}  // namespace zoopt
