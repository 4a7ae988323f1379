#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rsgdm/objectives.hpp"
#include "rsgdm/optim.hpp"

using namespace rsgdm;
using namespace rsgdm::objectives;

namespace {

constexpr double kFdStep = 1e-6;

Quadratic diag21() { return Quadratic(2, {2, 0, 0, 1}, {2, 1}); }

}  // namespace

TEST(Quadratic, EvalExamples) {
  const Quadratic id(2, {1, 0, 0, 1}, {0, 0});
  EXPECT_EQ(quadratic_eval(id, std::vector<double>{0, 0}), 0.0);
  EXPECT_EQ(quadratic_eval(id, std::vector<double>{1, 1}), 1.0);
  EXPECT_EQ(quadratic_eval(diag21(), std::vector<double>{1, 1}), -1.5);
}

TEST(Quadratic, GradExamples) {
  const auto q = diag21();
  const auto opt = q.minimizer();
  EXPECT_NEAR(opt[0], 1.0, 1e-15);
  EXPECT_NEAR(opt[1], 1.0, 1e-15);
  for (double g : quadratic_grad(q, opt)) EXPECT_NEAR(g, 0.0, 1e-15);

  const Quadratic id(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0});
  const std::vector<double> theta{0.3, -1.0, 2.0};
  EXPECT_EQ(quadratic_grad(id, theta), theta);
}

TEST(Quadratic, RejectsBadInput) {
  EXPECT_THROW(Quadratic(2, {1, 0, 0, -1}, {0, 0}), std::invalid_argument);   // indefinite
  EXPECT_THROW(Quadratic(2, {1, 0.5, 0, 1}, {0, 0}), std::invalid_argument);  // not symmetric
  EXPECT_THROW(Quadratic(2, {1, 0, 0}, {0, 0}), ShapeError);
  EXPECT_THROW(diag21().eval(std::vector<double>{1.0}), ShapeError);
}

TEST(Quadratic, RandomInstanceMinimizerHasZeroGradient) {
  const auto q = make_random_quadratic(10, 4);
  EXPECT_LE(l2_norm<double>(q.grad(q.minimizer())), 1e-8);
}

TEST(Quadratic, GradientMatchesFiniteDifferences) {
  const auto q = make_random_quadratic(6, 1);
  SplitMix64 rng(100);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.normal();
    const auto fd = oracle::central_gradient([&](std::span<const double> t) { return q.eval(t); }, x, kFdStep);
    const auto g = q.grad(x);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_LE(oracle::rel_err(g[i], fd[i]), 1e-5);
  }
}

TEST(Rosenbrock, Examples) {
  EXPECT_EQ(rosenbrock_eval(std::vector<double>{1, 1}), 0.0);
  EXPECT_EQ(rosenbrock_grad(std::vector<double>{1, 1}), (std::vector<double>{0, 0}));
  EXPECT_EQ(rosenbrock_eval(std::vector<double>{0, 0}), 1.0);
  EXPECT_EQ(rosenbrock_grad(std::vector<double>{0, 0}), (std::vector<double>{-2, 0}));
  EXPECT_THROW(rosenbrock_eval(std::vector<double>{1, 1, 1}), ShapeError);
}

TEST(Rosenbrock, GradientMatchesFiniteDifferences) {
  SplitMix64 rng(101);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x{rng.uniform(-2, 2), rng.uniform(-1, 3)};
    const auto fd = oracle::central_gradient(rosenbrock_eval, x, kFdStep);
    const auto g = rosenbrock_grad(x);
    for (std::size_t i = 0; i < 2; ++i) ASSERT_LE(oracle::rel_err(g[i], fd[i]), 1e-5);
  }
}

TEST(SynthData, SeededAndSeparable) {
  const auto a = make_synth_classification(200, 2, 0.5, 7);
  const auto b = make_synth_classification(200, 2, 0.5, 7);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);

  // the generating hyperplane classifies everything, with margin
  std::vector<double> sep(a.separator);
  sep.push_back(0.0);
  EXPECT_EQ(logistic_accuracy(a, sep), 1.0);
  for (std::size_t i = 0; i < a.n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < a.d; ++j) s += a.separator[j] * a.row(i)[j];
    EXPECT_GE(std::abs(s), 0.5);
  }

  const auto v = make_synth_classification(200, 2, 0.5, 7, 1);
  EXPECT_EQ(v.separator, a.separator);
  EXPECT_NE(v.features, a.features);

  EXPECT_THROW(make_synth_classification(0, 2, 0.5, 7), std::invalid_argument);
  EXPECT_THROW(make_synth_classification(10, 2, 0.0, 7), std::invalid_argument);
}

TEST(SynthData, LabelBalance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = make_synth_classification(2000, 20, 0.5, seed);
    std::size_t ones = 0;
    for (int y : d.labels) ones += static_cast<std::size_t>(y);
    const double frac = static_cast<double>(ones) / 2000.0;
    EXPECT_GE(frac, 0.4);
    EXPECT_LE(frac, 0.6);
  }
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  const auto data = make_synth_classification(64, 5, 0.3, 3);
  const auto batch = all_indices(data.n);
  SplitMix64 rng(102);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> theta(6);
    for (auto& v : theta) v = rng.normal();
    const auto fd = oracle::central_gradient(
        [&](std::span<const double> t) { return logistic_loss(data, t, batch); }, theta, kFdStep);
    const auto g = logistic_minibatch_grad(data, theta, batch);
    for (std::size_t i = 0; i < theta.size(); ++i) ASSERT_LE(oracle::rel_err(g[i], fd[i]), 1e-5) << i;
  }
}

TEST(Logistic, SaturatedSeparatorHasVanishingGradient) {
  const auto data = make_synth_classification(300, 4, 0.5, 5);
  std::vector<double> theta(data.separator);
  theta.push_back(0.0);
  for (auto& v : theta) v *= 200.0;
  EXPECT_LE(l2_norm<double>(logistic_minibatch_grad(data, theta, all_indices(data.n))), 1e-20);
}

TEST(Logistic, HalfBatchesAverageToFullBatch) {
  const auto data = make_synth_classification(100, 3, 0.2, 6);
  std::vector<double> theta{0.3, -0.2, 0.8, 0.1};
  std::vector<std::size_t> lo, hi;
  for (std::size_t i = 0; i < 50; ++i) lo.push_back(i);
  for (std::size_t i = 50; i < 100; ++i) hi.push_back(i);
  const auto full = logistic_minibatch_grad(data, theta, all_indices(100));
  const auto a = logistic_minibatch_grad(data, theta, lo), b = logistic_minibatch_grad(data, theta, hi);
  for (std::size_t i = 0; i < theta.size(); ++i) EXPECT_NEAR(0.5 * (a[i] + b[i]), full[i], 1e-15);
}

TEST(Logistic, Errors) {
  const auto data = make_synth_classification(10, 3, 0.2, 6);
  std::vector<double> theta(4, 0.0);
  const std::vector<std::size_t> bad{0, 10};
  EXPECT_THROW(logistic_minibatch_grad(data, theta, bad), std::out_of_range);
  EXPECT_THROW(logistic_minibatch_grad(data, std::vector<double>(3), all_indices(10)), ShapeError);
}

// Property: mean over the disjoint batches of an epoch equals the full
// gradient (weighted by batch size, since the tail batch is short).
TEST(Batches, EpochCoverageAndUnbiasedness) {
  const auto data = make_synth_classification(300, 4, 0.2, 8);
  std::vector<double> theta{0.1, 0.2, -0.3, 0.4, 0.05};
  SplitMix64 rng(9);
  const auto batches = epoch_batches(data.n, 128, rng);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches.back().size(), 44u);
  std::vector<int> seen(data.n, 0);
  std::vector<double> acc(theta.size(), 0.0);
  for (const auto& b : batches) {
    for (auto i : b) ++seen[i];
    const auto g = logistic_minibatch_grad(data, theta, b);
    for (std::size_t k = 0; k < g.size(); ++k) acc[k] += g[k] * static_cast<double>(b.size()) / 300.0;
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  const auto full = logistic_minibatch_grad(data, theta, all_indices(data.n));
  for (std::size_t k = 0; k < full.size(); ++k) EXPECT_NEAR(acc[k], full[k], 1e-12);

  SplitMix64 r1(4), r2(4);
  EXPECT_EQ(epoch_batches(50, 8, r1), epoch_batches(50, 8, r2));
}

// Property: equal-size batches are unbiased in the plain mean-of-means sense.
TEST(Batches, EqualBatchMeanIsFullGradient) {
  const auto data = make_synth_classification(256, 4, 0.2, 8);
  std::vector<double> theta{0.1, 0.2, -0.3, 0.4, 0.05};
  SplitMix64 rng(10);
  const auto batches = epoch_batches(data.n, 64, rng);
  std::vector<double> acc(theta.size(), 0.0);
  for (const auto& b : batches) {
    const auto g = logistic_minibatch_grad(data, theta, b);
    for (std::size_t k = 0; k < g.size(); ++k) acc[k] += g[k] / static_cast<double>(batches.size());
  }
  const auto full = logistic_minibatch_grad(data, theta, all_indices(data.n));
  for (std::size_t k = 0; k < full.size(); ++k) EXPECT_NEAR(acc[k], full[k], 1e-12);
}

TEST(Convergence, SgdmAndRsgdmSolveTheQuadratic) {
  const auto q = make_random_quadratic(8, 2);
  const auto target = q.minimizer();
  for (auto kind : {OptimizerKind::sgdm, OptimizerKind::rsgdm}) {
    Optimizer opt(kind, 8, 0.9, 0.1);
    std::vector<double> theta(8, 0.0);
    for (int k = 0; k < 10000; ++k) opt.step(theta, q.grad(theta));
    double err = 0;
    for (std::size_t i = 0; i < 8; ++i) err += (theta[i] - target[i]) * (theta[i] - target[i]);
    EXPECT_LE(std::sqrt(err), 1e-6) << to_string(kind);
  }
}
