#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "bwcr/algorithms.h"
#include "bwcr/benchmark.h"

namespace bwcr {
namespace {

using Kind = SeparableTerm::Kind;

Mat row_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Mat m(rows.size(), rows.begin()->size());
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

ConvexSet at_most(double b) { return ConvexSet::box(Vec::Zero(1), Vec::Constant(1, b)); }

// Plays `steps` rounds against `instance`, checking the state invariants.
void play(AlgorithmState& state, const InstanceModel& instance, int steps, std::uint64_t seed) {
  Rng arms = Rng::for_stream(seed, 0, Stream::kArms);
  Rng obs = Rng::for_stream(seed, 0, Stream::kObservations);
  for (int t = 0; t < steps; ++t) {
    const Vec spent_before = state.budget_spent;
    const Decision dec = step(state);
    ASSERT_NO_THROW(dec.policy.validate());
    const ArmChoice arm = draw_arm(dec.policy, arms);
    const Vec v = arm ? sample_observation(instance, *arm, obs) : Vec(Vec::Zero(state.d));
    observe(state, arm, v);
    ASSERT_TRUE((state.xbar.array() >= -1e-12).all() && (state.xbar.array() <= 1 + 1e-12).all());
    ASSERT_TRUE((state.budget_spent.array() >= spent_before.array()).all());
  }
}

TEST(Defaults, SigmaAndShrink) {
  EXPECT_NEAR(default_sigma(2, 100), std::sqrt(0.02 * std::log(200.0)), 1e-15);
  EXPECT_DOUBLE_EQ(default_bwk_eps(5, 10.0, 200.0), 0.5);
  EXPECT_NEAR(default_bwk_eps(5, 10.0, 20000.0), std::sqrt(50.0 / 20000.0), 1e-15);
}

TEST(Config, RejectsMissingFields) {
  AlgorithmConfig cfg;
  cfg.horizon = 10;
  EXPECT_THROW(cfg.validate(2, 3), ConfigError);  // ucb_bwcr without f or S
  cfg.variant = Variant::kDualOco;
  cfg.objective = Objective::linear(Vec::Ones(2));
  cfg.target = ConvexSet::unit_box(2);
  EXPECT_THROW(cfg.validate(2, 3), ConfigError);
  cfg.variant = Variant::kFwPrimal;
  cfg.objective = Objective::separable({{Kind::kSqrt, 1, 0.5}, {Kind::kSqrt, 1, 0.5}});
  EXPECT_THROW(cfg.validate(2, 3), ConfigError);
  cfg.sigma_auto = true;
  EXPECT_NO_THROW(cfg.validate(2, 3));
  cfg.variant = Variant::kUcbBwk;
  EXPECT_THROW(cfg.validate(2, 3), ConfigError);  // no budget
  cfg.budget = 5.0;
  EXPECT_THROW(cfg.validate(1, 3), ConfigError);  // no resource row
  EXPECT_THROW(variant_from_string("ucb"), ConfigError);
  EXPECT_EQ(variant_from_string(to_string(Variant::kGreedyBwk)), Variant::kGreedyBwk);
}

TEST(Selection, ArgminIsScaleInvariant) {
  Rng rng(51);
  for (int trial = 0; trial < 500; ++trial) {
    Mat a(3, 5);
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 5; ++i) a(j, i) = rng.uniform();
    }
    Vec theta(3);
    for (int j = 0; j < 3; ++j) theta[j] = rng.uniform(-1.0, 1.0);
    const int base = argmin_column(a, theta);
    for (double s : {0.01, 0.5, 3.0, 250.0}) ASSERT_EQ(argmin_column(a, s * theta), base);
  }
}

// Minimum of a.p over {p >= 0, sum p <= 1 (== 1 without idle), b.p <= h} by
// enumerating the vertices of the two-arm polytope.
std::optional<double> two_arm_vertex_oracle(const Vec& a, const Vec& b, double h, bool idle) {
  const Vec e0 = (Vec(2) << 1.0, 0.0).finished(), e1 = (Vec(2) << 0.0, 1.0).finished();
  const Vec origin = Vec::Zero(2);
  std::vector<Vec> corners = {e0, e1};
  std::vector<std::pair<Vec, Vec>> edges = {{e0, e1}};
  if (idle) {
    corners.push_back(origin);
    edges.push_back({origin, e0});
    edges.push_back({origin, e1});
  }
  std::vector<Vec> candidates;
  for (const Vec& c : corners) {
    if (b.dot(c) <= h + 1e-12) candidates.push_back(c);
  }
  for (const auto& [u, w] : edges) {
    const double bu = b.dot(u), bw = b.dot(w);
    if ((bu - h) * (bw - h) < 0) {
      const double s = (h - bu) / (bw - bu);
      candidates.push_back(u + s * (w - u));
    }
  }
  if (candidates.empty()) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& c : candidates) best = std::min(best, a.dot(c));
  return best;
}

TEST(Selection, OneConstraintMatchesVertexOracle) {
  Rng rng(52);
  for (int trial = 0; trial < 400; ++trial) {
    const bool idle = trial % 2 == 1;
    Vec a(2), b(2);
    a << rng.uniform(-1, 1), rng.uniform(-1, 1);
    b << rng.uniform(-1, 1), rng.uniform(-1, 1);
    const double h = rng.uniform(-0.5, 0.5);
    const auto expected = two_arm_vertex_oracle(a, b, h, idle);
    const auto sol = solve_one_constraint(a, b, h, idle);
    ASSERT_EQ(sol.has_value(), expected.has_value()) << trial;
    if (!expected) continue;
    EXPECT_LE(b.dot(sol->weights), h + 1e-9);
    EXPECT_NEAR(a.dot(sol->weights), *expected, 1e-12);
  }
}

TEST(UcbBwcr, KnownMeanReachesTheBenchmark) {
  const Mat v = row_matrix({{0.9, 0.2, 0.5}, {0.1, 0.8, 0.4}});
  const Objective f = Objective::separable({{Kind::kLog1p, 1.0, 0.5}, {Kind::kQuadratic, 1.0, 0.9}});
  Mat a(1, 2);
  a << 1.0, 1.0;
  const ConvexSet s = ConvexSet::halfspaces(a, Vec::Constant(1, 0.9));
  const BenchmarkResult bench = compute_opt(v, f, s);
  ASSERT_TRUE(bench.feasible);
  AlgorithmConfig cfg;
  cfg.objective = f;
  cfg.target = s;
  cfg.horizon = 5;
  cfg.known_mean = v;
  AlgorithmState state(cfg, 2, 3);
  const Decision dec = step(state);
  EXPECT_NEAR(f.value(v * dec.policy.weights), bench.opt_value, 1e-2);
  EXPECT_TRUE(s.contains(v * dec.policy.weights, 1e-6));
}

TEST(UcbBwk, KnownMeanTwoArmExample) {
  AlgorithmConfig cfg;
  cfg.variant = Variant::kUcbBwk;
  cfg.horizon = 100;
  cfg.budget = 50.0;
  cfg.eps = 0.0;
  cfg.known_mean = row_matrix({{1.0, 0.5}, {1.0, 0.0}});
  AlgorithmState state(cfg, 2, 2);
  const Decision dec = step(state);
  EXPECT_NEAR(dec.policy.weights[0], 0.5, 1e-12);
  EXPECT_NEAR(dec.policy.weights[1], 0.5, 1e-12);
}

TEST(UcbBwk, StopsOnceABudgetIsExceeded) {
  AlgorithmConfig cfg;
  cfg.variant = Variant::kUcbBwk;
  cfg.horizon = 100;
  cfg.budget = 3.0;
  AlgorithmState state(cfg, 2, 2);
  const InstanceModel inst(row_matrix({{1.0, 1.0}, {1.0, 1.0}}), OutcomeKind::kFixed);
  play(state, inst, 4, 1);
  EXPECT_DOUBLE_EQ(state.budget_spent[1], 4.0);
  const Decision dec = step(state);
  EXPECT_TRUE(dec.stop);
  EXPECT_TRUE(state.stopped);
  EXPECT_DOUBLE_EQ(dec.policy.mass(), 0.0);
}

TEST(GreedyBwk, ZeroConsumptionArmWinsTheTie) {
  AlgorithmConfig cfg;
  cfg.variant = Variant::kGreedyBwk;
  cfg.horizon = 100;
  cfg.budget = 50.0;
  cfg.known_mean = row_matrix({{1.0, 0.5}, {1.0, 0.0}});
  AlgorithmState state(cfg, 2, 2);
  ASSERT_DOUBLE_EQ(state.phi[0], 1.0);
  const Decision dec = step(state);
  EXPECT_DOUBLE_EQ(dec.policy.weights[1], 1.0);
  EXPECT_DOUBLE_EQ(dec.policy.weights[0], 0.0);
}

TEST(FwBwc, UniformInsideTheTarget) {
  AlgorithmConfig cfg;
  cfg.variant = Variant::kFwBwc;
  cfg.target = at_most(1.0);
  cfg.horizon = 10;
  AlgorithmState state(cfg, 1, 3);
  const Decision dec = step(state);
  EXPECT_TRUE(dec.policy.weights.isApprox(PolicyDistribution::uniform(3).weights));
}

TEST(FwBwc, OutsideTheTargetPicksTheSmallestLowerBound) {
  AlgorithmConfig cfg;
  cfg.variant = Variant::kFwBwc;
  cfg.target = at_most(0.5);
  cfg.horizon = 10;
  AlgorithmState state(cfg, 1, 3);
  state.xbar = Vec::Constant(1, 0.8);
  // Three arms with lower bounds 0.4, 0.1, 0.3 after hand-fed observations.
  state.confidence = ConfidenceState(1, 3, 0.01);
  for (int k = 0; k < 200; ++k) {
    state.confidence.record(0, Vec::Constant(1, 0.45));
    state.confidence.record(1, Vec::Constant(1, 0.15));
    state.confidence.record(2, Vec::Constant(1, 0.35));
  }
  const Decision dec = step(state);
  EXPECT_NEAR(state.theta[0], 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(dec.policy.weights[1], 1.0);
}

TEST(FwPrimal, LinearObjectiveRepeatsOneArm) {
  AlgorithmConfig cfg;
  cfg.variant = Variant::kFwPrimal;
  cfg.objective = Objective::linear(Vec::Ones(2));
  cfg.horizon = 50;
  cfg.known_mean = row_matrix({{0.2, 0.6, 0.5}, {0.3, 0.3, 0.5}});
  AlgorithmState state(cfg, 2, 3);
  const InstanceModel inst(*cfg.known_mean, OutcomeKind::kFixed);
  for (int t = 0; t < 50; ++t) {
    const Decision dec = step(state);
    ASSERT_DOUBLE_EQ(dec.policy.weights[2], 1.0);
    observe(state, 2, inst.mean().col(2));
  }
  EXPECT_THROW(step(state), ContractError);
}

TEST(FwPrimal, KnownParameterGapBound) {
  // f = 1 - (x - 0.5)^2 on arms {0.2, 0.9}: gap <= 2 log(2t) / (2t).
  AlgorithmConfig cfg;
  cfg.variant = Variant::kFwPrimal;
  cfg.objective = Objective::separable({{Kind::kQuadratic, 1.0, 0.5}});
  cfg.horizon = 10000;
  cfg.known_mean = row_matrix({{0.2, 0.9}});
  AlgorithmState state(cfg, 1, 2);
  const Objective& f = *cfg.objective;
  for (int t = 1; t <= 10000; ++t) {
    const Decision dec = step(state);
    const int arm = dec.policy.weights[0] > 0.5 ? 0 : 1;
    observe(state, arm, cfg.known_mean->col(arm));
    const double gap = f.value(Vec::Constant(1, 0.5)) - f.value(state.xbar);
    ASSERT_LE(gap, 2.0 * std::log(2.0 * t) / (2.0 * t) + 1e-12) << t;
  }
}

TEST(DualOco, SetOnlyRuleSettlesOnTheLowArm) {
  AlgorithmConfig cfg;
  cfg.variant = Variant::kDualOco;
  cfg.target = at_most(0.5);
  cfg.horizon = 200;
  cfg.known_mean = row_matrix({{0.9, 0.3}});
  AlgorithmState state(cfg, 1, 2);
  const InstanceModel inst(*cfg.known_mean, OutcomeKind::kFixed);
  for (int t = 0; t < 10; ++t) {
    const Decision dec = step(state);
    const int arm = dec.policy.weights[0] > 0.5 ? 0 : 1;
    observe(state, arm, inst.mean().col(arm));
  }
  EXPECT_GT(state.theta[0], 0.0);
  EXPECT_DOUBLE_EQ(step(state).policy.weights[1], 1.0);
}

TEST(Invariants, EveryVariantKeepsStateInvariants) {
  const Mat v = row_matrix({{0.8, 0.4, 0.3}, {0.5, 0.2, 0.6}, {0.1, 0.7, 0.3}});
  const InstanceModel inst(v);
  const Objective f = Objective::separable(
      {{Kind::kLog1p, 1.0, 0.5}, {Kind::kQuadratic, 1.0, 0.4}, {Kind::kLog1p, 0.5, 0.5}});
  Mat a(1, 3);
  a << 0.0, 1.0, 1.0;
  const ConvexSet s = ConvexSet::halfspaces(a, Vec::Constant(1, 0.8));
  for (Variant var : {Variant::kUcbBwcr, Variant::kUcbBwk, Variant::kDualOco, Variant::kFwPrimal,
                      Variant::kFwBwc, Variant::kCombined, Variant::kGreedyBwk}) {
    AlgorithmConfig cfg;
    cfg.variant = var;
    cfg.horizon = 300;
    if (is_bwk(var)) {
      cfg.budget = 60.0;
    } else if (var == Variant::kFwBwc) {
      cfg.target = s;
    } else if (var == Variant::kDualOco || var == Variant::kFwPrimal) {
      cfg.objective = f;
    } else {
      cfg.objective = f;
      cfg.target = s;
    }
    AlgorithmState state(cfg, 3, 3);
    play(state, inst, 300, 7);
    EXPECT_EQ(state.t, 300) << to_string(var);
  }
}

TEST(Combined, PrimalSmoothedUpdatesNeedNoLearner) {
  AlgorithmConfig cfg;
  cfg.variant = Variant::kCombined;
  cfg.objective = Objective::separable({{Kind::kLog1p, 1.0, 0.5}});
  cfg.target = at_most(0.6);
  cfg.theta_update = UpdateRule::kPrimalSmoothed;
  cfg.phi_update = UpdateRule::kPrimal;
  cfg.sigma_auto = true;
  cfg.horizon = 100;
  AlgorithmState state(cfg, 1, 2);
  EXPECT_FALSE(state.theta_oco.has_value());
  EXPECT_FALSE(state.phi_oco.has_value());
  ASSERT_TRUE(state.config.sigma.has_value());
  EXPECT_NEAR(*state.config.sigma, default_sigma(1, 100), 1e-15);
  play(state, InstanceModel(row_matrix({{0.9, 0.2}})), 100, 3);
}

}  // namespace
}  // namespace bwcr
