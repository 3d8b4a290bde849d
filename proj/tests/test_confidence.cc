#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "bwcr/confidence.h"
#include "oracles.h"

namespace bwcr {
namespace {

TEST(Radius, HandValue) {
  // sqrt(4 * 0.25 / 100) + 4 / 100.
  EXPECT_NEAR(rad(0.25, 100, 4.0), 0.14, 1e-15);
}

TEST(Radius, DefaultGamma) {
  EXPECT_NEAR(default_gamma(5, 500, 3, 0.05), std::log(5.0 * 500 * 3 / 0.05), 1e-12);
  EXPECT_THROW(default_gamma(5, 500, 3, 1.5), ContractError);
}

TEST(Radius, MonotoneInCountAndGamma) {
  for (double n = 1; n < 1000; n *= 1.7) {
    EXPECT_GT(rad(0.3, n, 2.0), rad(0.3, n + 1, 2.0));
    EXPECT_LT(rad(0.3, n, 2.0), rad(0.3, n, 2.5));
  }
}

TEST(ConfidenceState, UnplayedArmIsVacuous) {
  ConfidenceState cs(2, 3, 0.2);
  const Hypercube hc = cs.hypercube();
  EXPECT_TRUE((hc.lcb.array() == 0.0).all());
  // ucb = min(1, 2 gamma) with a zero mean and rad = gamma.
  EXPECT_TRUE((hc.ucb.array() == 0.4).all());
}

TEST(ConfidenceState, HandComputedBounds) {
  ConfidenceState cs(1, 1, 1.0);
  Vec one = Vec::Ones(1), zero = Vec::Zero(1);
  for (int i = 0; i < 50; ++i) cs.record(0, one);
  for (int i = 0; i < 49; ++i) cs.record(0, zero);
  ASSERT_EQ(cs.counts()[0], 99);
  EXPECT_DOUBLE_EQ(cs.empirical_mean()(0, 0), 0.5);
  const Hypercube hc = cs.hypercube();
  EXPECT_NEAR(hc.ucb(0, 0), 0.66142135623730950, 1e-12);
  EXPECT_NEAR(hc.lcb(0, 0), 0.33857864376269050, 1e-12);
}

TEST(ConfidenceState, IdleStepsOnlyAdvanceTime) {
  ConfidenceState cs(2, 2, 1.0);
  cs.record(std::nullopt, Vec::Zero(2));
  EXPECT_EQ(cs.t(), 1);
  EXPECT_EQ(cs.total_plays(), 0);
  EXPECT_THROW(cs.record(2, Vec::Zero(2)), std::out_of_range);
}

TEST(ConfidenceState, BoundsAreOrderedAndClipped) {
  Rng rng(5);
  ConfidenceState cs(3, 4, 2.0);
  for (int t = 0; t < 2000; ++t) {
    Vec v(3);
    for (int j = 0; j < 3; ++j) v[j] = rng.bernoulli(0.2 + 0.2 * j) ? 1.0 : 0.0;
    cs.record(static_cast<int>(rng.uniform_index(4)), v);
    if (t % 97 == 0) {
      const Hypercube hc = cs.hypercube();
      ASSERT_NO_THROW(hc.validate());
      ASSERT_TRUE((hc.lcb.array() <= hc.ucb.array()).all());
      ASSERT_TRUE((hc.lcb.array() >= 0.0).all() && (hc.ucb.array() <= 1.0).all());
    }
  }
}

TEST(Vertex, AttainsCornerMinimumExhaustively) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform_index(3));
    const int m = 1 + static_cast<int>(rng.uniform_index(4));
    Mat lo(d, m), hi(d, m);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < m; ++i) {
        const double a = rng.uniform(), b = rng.uniform();
        lo(j, i) = std::min(a, b);
        hi(j, i) = std::max(a, b);
      }
    }
    const Hypercube hc{lo, hi};
    Vec theta(d);
    for (int j = 0; j < d; ++j) theta[j] = rng.uniform(-1.0, 1.0);
    if (trial % 10 == 0) theta[0] = 0.0;
    const Vec mine = vertex(hc, theta).transpose() * theta;
    const Vec brute = oracle::corner_minimum(hc, theta);
    for (int i = 0; i < m; ++i) ASSERT_NEAR(mine[i], brute[i], 1e-12);
  }
}

TEST(Vertex, SignConvention) {
  Mat lo(2, 1), hi(2, 1);
  lo << 0.1, 0.2;
  hi << 0.8, 0.9;
  Vec theta(2);
  theta << 1.0, -1.0;
  const Mat a = vertex(Hypercube{lo, hi}, theta);
  EXPECT_EQ(a(0, 0), 0.1);  // theta > 0 takes the lower bound
  EXPECT_EQ(a(1, 0), 0.9);  // theta <= 0 takes the upper bound
}

TEST(Hypercube, DegenerateAndContainment) {
  Mat v(2, 2);
  v << 0.1, 0.2, 0.3, 0.4;
  const Hypercube hc = Hypercube::degenerate(v);
  EXPECT_TRUE(hc.contains(v));
  Mat off = v;
  off(1, 1) += 1e-3;
  EXPECT_FALSE(hc.contains(off));
  EXPECT_TRUE(hc.contains(off, 1e-2));
  EXPECT_TRUE(Hypercube::vacuous(2, 2).contains(off));
}

std::shared_ptr<ContextualModel> line_model() {
  auto model = std::make_shared<ContextualModel>();
  model->n = 1;
  model->weights = {Vec::Constant(1, 0.75)};
  model->contexts = {{Vec::Ones(1), Vec::Constant(1, 0.5)}};
  return model;
}

TEST(Ellipsoid, HandComputedExtremes) {
  // Gram 1 + 3 = 4, rhs 3: center 0.75, half-width sqrt(1 / 4) = 0.5.
  EllipsoidState es(line_model(), 1.0);
  for (int i = 0; i < 3; ++i) es.record(0, Vec::Ones(1));
  EXPECT_NEAR(es.center(0)[0], 0.75, 1e-15);
  EXPECT_NEAR(es.min_linear(0, Vec::Ones(1)), 0.25, 1e-15);
  EXPECT_NEAR(es.max_linear(0, Vec::Ones(1)), 1.25, 1e-15);
  const Hypercube env = es.envelope();
  EXPECT_NEAR(env.lcb(0, 0), 0.25, 1e-15);
  EXPECT_EQ(env.ucb(0, 0), 1.0);
  EXPECT_NEAR(env.lcb(0, 1), 0.125, 1e-15);
  EXPECT_NEAR(env.ucb(0, 1), 0.625, 1e-15);
}

TEST(Ellipsoid, ClosedFormMatchesSampledOracle) {
  auto model = std::make_shared<ContextualModel>();
  model->n = 3;
  Rng rng(8);
  model->weights = {Vec::Constant(3, 0.3)};
  std::vector<Vec> ctx;
  for (int i = 0; i < 6; ++i) {
    Vec x(3);
    for (int k = 0; k < 3; ++k) x[k] = rng.uniform();
    ctx.push_back(x);
  }
  model->contexts = {ctx};
  EllipsoidState es(model, 2.0);
  for (int t = 0; t < 60; ++t) {
    const int arm = static_cast<int>(rng.uniform_index(6));
    es.record(arm, Vec::Constant(1, rng.bernoulli(ctx[arm].sum() * 0.3) ? 1.0 : 0.0));
  }
  Vec c(3);
  c << 0.4, -0.2, 0.9;
  const double exact = es.min_linear(0, c);
  Rng orng(9);
  const double sampled =
      oracle::ellipsoid_min_sampled(es.center(0), es.gram(0), es.radius2(), c, 200000, orng);
  EXPECT_LE(exact, sampled + 1e-12);
  EXPECT_NEAR(exact, sampled, 5e-3);
  EXPECT_TRUE(es.contains(0, es.center(0)));
}

TEST(Ellipsoid, InverseStaysConsistentWithGram) {
  auto model = line_model();
  EllipsoidState es(model);
  for (int t = 0; t < 500; ++t) es.record(t % 2, Vec::Constant(1, 0.5));
  EXPECT_NEAR((es.gram(0) * es.gram_inverse(0))(0, 0), 1.0, 1e-12);
}

}  // namespace
}  // namespace bwcr
