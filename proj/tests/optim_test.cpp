#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <type_traits>

#include "oracles.hpp"
#include "rsgdm/optim.hpp"

using namespace rsgdm;

namespace {

std::vector<double> random_vector(SplitMix64& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

TEST(SgdStep, HandArithmetic) {
  EXPECT_DOUBLE_EQ(sgd_step<double>({1.0}, {1.0}, 0.01)[0], 0.99);
  const auto out = sgd_step<double>({0.0, 0.0}, {1.0, -1.0}, 1.0);
  EXPECT_EQ(out, (std::vector<double>{-1.0, 1.0}));
}

TEST(SgdStep, ZeroGradientIsFixedPoint) {
  for (double alpha : {1e-6, 0.01, 3.0}) EXPECT_EQ(sgd_step<double>({4.25}, {0.0}, alpha)[0], 4.25);
}

TEST(SgdStep, LeavesInputsUnmodified) {
  const std::vector<double> theta{1.0, 2.0}, g{0.5, -0.5};
  (void)sgd_step(theta, g, 0.1);
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(g, (std::vector<double>{0.5, -0.5}));
}

TEST(SgdStep, Errors) {
  EXPECT_THROW(sgd_step<double>({1.0, 2.0}, {1.0}, 0.1), ShapeError);
  EXPECT_THROW(sgd_step<double>({std::nan("")}, {1.0}, 0.1), NumericError);
  EXPECT_THROW(sgd_step<double>({1.0}, {std::numeric_limits<double>::infinity()}, 0.1), NumericError);
  EXPECT_THROW(sgd_step<double>({1.0}, {1.0}, 0.0), std::invalid_argument);
}

TEST(SgdmStep, FirstStep) {
  SgdmState<double> s(1, 0.9, 0.01);
  auto [next, theta] = sgdm_step(s, {1.0}, {1.0});
  EXPECT_NEAR(next.m[0], 0.1, 1e-15);
  EXPECT_NEAR(theta[0], 0.999, 1e-15);
  EXPECT_EQ(next.t, 1);
  EXPECT_EQ(s.t, 0);  // input state untouched
  EXPECT_EQ(s.m[0], 0.0);
}

TEST(SgdmStep, BetaZeroMatchesSgd) {
  SgdmState<double> s(2, 0.0, 0.05);
  auto [next, theta] = sgdm_step(s, {1.0, -2.0}, {0.3, 0.7});
  EXPECT_EQ(theta, sgd_step<double>({1.0, -2.0}, {0.3, 0.7}, 0.05));
  EXPECT_EQ(next.m, (std::vector<double>{0.3, 0.7}));
}

TEST(SgdmStep, ConstantGradientGeometricSeries) {
  const double beta = 0.9, c = 2.5;
  SgdmState<double> s(1, beta, 0.01);
  std::vector<double> theta{0.0};
  for (int t = 1; t <= 60; ++t) {
    s.step(theta, std::vector<double>{c});
    EXPECT_NEAR(s.m[0], (1 - std::pow(beta, t)) * c, 1e-13) << "t=" << t;
  }
}

TEST(SgdmStep, RejectsBadHyperparameters) {
  EXPECT_THROW(SgdmState<double>(1, 1.0, 0.01), std::invalid_argument);
  EXPECT_THROW(SgdmState<double>(1, -0.1, 0.01), std::invalid_argument);
  EXPECT_THROW(SgdmState<double>(1, 0.9, -1.0), std::invalid_argument);
}

TEST(SgdmStep, ShapeAndNumericErrorsLeaveStateIntact) {
  SgdmState<double> s(2, 0.9, 0.01);
  std::vector<double> theta{1.0, 1.0};
  EXPECT_THROW(s.step(theta, std::vector<double>{1.0}), ShapeError);
  EXPECT_THROW(s.step(theta, std::vector<double>{1.0, std::nan("")}), NumericError);
  EXPECT_EQ(s.t, 0);
  EXPECT_EQ(s.m, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(theta, (std::vector<double>{1.0, 1.0}));
}

TEST(RsgdmStep, TwoStepHandValues) {
  RsgdmState<double> s(1, 0.9, 0.01);
  auto [s1, th1] = rsgdm_step(s, {1.0}, {1.0});
  EXPECT_NEAR(s1.m[0], 0.1, 1e-15);
  EXPECT_EQ(s1.z[0], 0.0);
  EXPECT_NEAR(s1.corrected()[0], 0.1, 1e-15);
  EXPECT_NEAR(th1[0], 0.999, 1e-15);

  auto [s2, th2] = rsgdm_step(s1, th1, {2.0});
  EXPECT_NEAR(s2.m[0], 0.29, 1e-15);
  EXPECT_NEAR(s2.z[0], 0.1, 1e-15);
  EXPECT_NEAR(s2.corrected()[0], 0.38, 1e-15);
  EXPECT_NEAR(th2[0], 0.9952, 1e-15);
  EXPECT_EQ(s2.g_prev[0], 2.0);
  EXPECT_EQ(s2.t, 2);
}

TEST(RsgdmStep, FreshStateIsZeroAndZStaysZeroAfterFirstStep) {
  SplitMix64 rng(3);
  RsgdmState<double> s(5, 0.9, 0.01);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(s.m[i], 0.0);
    EXPECT_EQ(s.z[i], 0.0);
  }
  auto theta = random_vector(rng, 5);
  s.step(theta, random_vector(rng, 5));
  for (double z : s.z) EXPECT_EQ(z, 0.0);
}

TEST(RsgdmStep, ConfiguredByBetaAndAlphaOnly) {
  static_assert(std::is_constructible_v<RsgdmState<double>, std::size_t, double, double>);
  static_assert(std::is_constructible_v<SgdmState<double>, std::size_t, double, double>);
}

TEST(WeightDecay, Examples) {
  EXPECT_EQ(apply_weight_decay<double>({1.0, -3.0}, {7.0, 8.0}, {0.0}), (std::vector<double>{1.0, -3.0}));
  EXPECT_NEAR(apply_weight_decay<double>({1.0}, {2.0}, {5e-4})[0], 1.001, 1e-15);
  EXPECT_EQ(apply_weight_decay<double>({1.0}, {0.0}, {5e-4})[0], 1.0);
  EXPECT_THROW(apply_weight_decay<double>({1.0}, {0.0, 1.0}, {5e-4}), ShapeError);
  EXPECT_THROW(apply_weight_decay<double>({1.0}, {0.0}, {-1.0}), std::invalid_argument);
}

TEST(Schedule, HalvesEveryPeriod) {
  const ScheduleSpec spec{0.01, 50, 0.5};
  EXPECT_EQ(schedule_lr(spec, 0), 0.01);
  EXPECT_EQ(schedule_lr(spec, 49), 0.01);
  EXPECT_EQ(schedule_lr(spec, 50), 0.005);
  EXPECT_EQ(schedule_lr(spec, 149), 0.0025);
  EXPECT_EQ(schedule_lr(spec, 150), 0.00125);
  EXPECT_THROW(schedule_lr(spec, -1), std::invalid_argument);
}

TEST(Schedule, Validation) {
  EXPECT_THROW((ScheduleSpec{0.01, 0, 0.5}.validate()), std::invalid_argument);
  EXPECT_THROW((ScheduleSpec{0.01, 50, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((ScheduleSpec{0.01, 50, 1.5}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((ScheduleSpec{0.01, 50, 1.0}.validate()));
}

// Property: with beta = 0 all three optimizers trace the same trajectory.
TEST(OptimProperties, BetaZeroDegeneracy) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t dim = 1 + rng.below(8);
    const double alpha = rng.uniform(1e-3, 0.5);
    auto th_sgd = random_vector(rng, dim), th_m = th_sgd, th_r = th_sgd;
    SgdmState<double> sm(dim, 0.0, alpha);
    RsgdmState<double> sr(dim, 0.0, alpha);
    for (int step = 0; step < 200; ++step) {
      const auto g = random_vector(rng, dim, 3.0);
      th_sgd = sgd_step(th_sgd, g, alpha);
      sm.step(th_m, g);
      sr.step(th_r, g);
      for (std::size_t i = 0; i < dim; ++i) {
        ASSERT_LE(std::abs(th_m[i] - th_sgd[i]), 1e-12);
        ASSERT_LE(std::abs(th_r[i] - th_sgd[i]), 1e-12);
      }
    }
  }
}

// Property: a constant stream has zero differentials, so RSGDM == SGDM.
TEST(OptimProperties, ConstantGradientEquivalence) {
  SplitMix64 rng(12);
  for (double beta : {0.0, 0.5, 0.9, 0.99}) {
    const std::size_t dim = 4;
    const auto g = random_vector(rng, dim);
    auto th_m = random_vector(rng, dim), th_r = th_m;
    SgdmState<double> sm(dim, beta, 0.01);
    RsgdmState<double> sr(dim, beta, 0.01);
    for (int step = 0; step < 500; ++step) {
      sm.step(th_m, g);
      sr.step(th_r, g);
      for (std::size_t i = 0; i < dim; ++i) ASSERT_LE(std::abs(th_m[i] - th_r[i]), 1e-12);
    }
  }
}

// Property: the recursive first moment equals its power-sum expansion.
TEST(OptimProperties, RecursionMatchesExpansion) {
  SplitMix64 rng(13);
  for (double beta : {0.0, 0.5, 0.9, 0.99}) {
    std::vector<double> stream;
    SgdmState<double> sm(1, beta, 0.01);
    RsgdmState<double> sr(1, beta, 0.01);
    std::vector<double> th1{0.0}, th2{0.0};
    for (std::size_t t = 1; t <= 200; ++t) {
      stream.push_back(rng.normal());
      sm.step(th1, std::vector<double>{stream.back()});
      sr.step(th2, std::vector<double>{stream.back()});
      ASSERT_LE(std::abs(sm.m[0] - static_cast<double>(oracle::ema_expansion(stream, beta, t))), 1e-12);
      ASSERT_LE(std::abs(sr.z[0] - static_cast<double>(oracle::diff_ema_expansion(stream, beta, t))), 1e-12);
    }
  }
}

// Property: coordinates are updated independently, so permutations commute.
TEST(OptimProperties, PermutationEquivariance) {
  SplitMix64 rng(14);
  const std::size_t dim = 7;
  const auto perm = seeded_permutation(dim, rng);
  auto theta = random_vector(rng, dim);
  std::vector<double> theta_p(dim);
  for (std::size_t i = 0; i < dim; ++i) theta_p[i] = theta[perm[i]];
  RsgdmState<double> a(dim, 0.9, 0.02), b(dim, 0.9, 0.02);
  for (int step = 0; step < 50; ++step) {
    const auto g = random_vector(rng, dim);
    std::vector<double> g_p(dim);
    for (std::size_t i = 0; i < dim; ++i) g_p[i] = g[perm[i]];
    a.step(theta, g);
    b.step(theta_p, g_p);
  }
  for (std::size_t i = 0; i < dim; ++i) EXPECT_EQ(theta_p[i], theta[perm[i]]);
}

TEST(OptimProperties, BitwiseDeterminism) {
  auto run = [] {
    SplitMix64 rng(99);
    RsgdmState<double> s(3, 0.9, 0.01);
    std::vector<double> theta{1.0, -1.0, 0.5};
    for (int i = 0; i < 300; ++i) s.step(theta, random_vector(rng, 3));
    return theta;
  };
  const auto a = run(), b = run();
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), a.size() * sizeof(double)));
}

TEST(Optimizer, RuntimeDispatchMatchesDirectStates) {
  SplitMix64 rng(5);
  const std::size_t dim = 3;
  auto th = random_vector(rng, dim);
  auto th_direct = th;
  Optimizer opt(OptimizerKind::rsgdm, dim, 0.9, 0.01);
  RsgdmState<double> direct(dim, 0.9, 0.01);
  for (int i = 0; i < 20; ++i) {
    const auto g = random_vector(rng, dim);
    opt.step(th, g);
    direct.step(th_direct, g);
  }
  EXPECT_EQ(th, th_direct);
  EXPECT_EQ(opt.steps(), 20);
  opt.set_learning_rate(0.005);
  EXPECT_EQ(opt.learning_rate(), 0.005);
  EXPECT_EQ(parse_optimizer("sgdm"), OptimizerKind::sgdm);
  EXPECT_THROW(parse_optimizer("adam"), std::invalid_argument);
}

TEST(Optimizer, FloatInstantiation) {
  SgdmState<float> s(2, 0.9f, 0.1f);
  std::vector<float> theta{1.0f, 2.0f};
  s.step(theta, std::vector<float>{1.0f, 1.0f});
  EXPECT_FLOAT_EQ(theta[0], 0.99f);
}
