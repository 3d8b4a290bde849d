#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bwcr/simplex.h"
#include "bwcr/solvers.h"
#include "oracles.h"

namespace bwcr {
namespace {

using Kind = SeparableTerm::Kind;

LpProblem two_arm_example() {
  LpProblem lp;
  lp.r = Vec(2);
  lp.r << 1.0, 0.5;
  lp.consumption = Mat(1, 2);
  lp.consumption << 1.0, 0.0;
  lp.budget_ratio = 0.5;
  return lp;
}

Hypercube random_hypercube(int d, int m, double max_width, Rng& rng) {
  Mat lo(d, m), hi(d, m);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < m; ++i) {
      const double c = rng.uniform();
      const double w = rng.uniform(0.0, max_width);
      lo(j, i) = std::max(0.0, c - w);
      hi(j, i) = std::min(1.0, c + w);
    }
  }
  return {lo, hi};
}

TEST(KnapsackLp, TwoArmExample) {
  const auto sol = solve_lp(two_arm_example());
  ASSERT_TRUE(sol.has_value());
  EXPECT_NEAR(sol->policy.weights[0], 0.5, 1e-12);
  EXPECT_NEAR(sol->policy.weights[1], 0.5, 1e-12);
  EXPECT_NEAR(sol->value, 0.75, 1e-12);
  EXPECT_NEAR(*oracle::lp_by_vertices(two_arm_example()), 0.75, 1e-12);
}

TEST(KnapsackLp, ShrinkAndIdle) {
  LpProblem lp = two_arm_example();
  lp.eps = 0.2;
  // Cap 0.4 on arm 0, the rest on arm 1.
  EXPECT_NEAR(solve_lp(lp)->value, 1.0 * 0.4 + 0.5 * 0.6, 1e-12);
  lp.eps = 0.0;
  lp.r << 1.0, 0.0;
  lp.allow_idle = true;
  const auto idle = solve_lp(lp);
  ASSERT_TRUE(idle.has_value());
  EXPECT_NEAR(idle->policy.mass(), 0.5, 1e-12);
  EXPECT_NEAR(idle->value, 0.5, 1e-12);
}

TEST(KnapsackLp, InfeasibleWithoutIdling) {
  LpProblem lp = two_arm_example();
  lp.consumption << 1.0, 1.0;
  EXPECT_FALSE(solve_lp(lp).has_value());
  EXPECT_FALSE(oracle::lp_by_vertices(lp).has_value());
  lp.allow_idle = true;
  EXPECT_TRUE(solve_lp(lp).has_value());
}

TEST(KnapsackLp, MatchesVertexEnumeration) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    LpProblem lp;
    const int m = 2 + static_cast<int>(rng.uniform_index(4));
    const int k = 1 + static_cast<int>(rng.uniform_index(3));
    lp.r = Vec(m);
    lp.consumption = Mat(k, m);
    for (int i = 0; i < m; ++i) lp.r[i] = rng.uniform();
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < m; ++i) lp.consumption(j, i) = rng.uniform();
    }
    lp.budget_ratio = rng.uniform(0.05, 0.8);
    lp.allow_idle = trial % 3 == 0;
    const auto mine = solve_lp(lp);
    const auto brute = oracle::lp_by_vertices(lp);
    ASSERT_EQ(mine.has_value(), brute.has_value()) << trial;
    if (!mine) continue;
    ASSERT_NEAR(mine->value, *brute, 1e-9) << trial;
    ASSERT_NO_THROW(mine->policy.validate());
    const Vec used = lp.consumption * mine->policy.weights;
    ASSERT_LE(used.maxCoeff(), lp.budget_ratio + 1e-9);
  }
}

TEST(Simplex, StrongDualityAndComplementarySlackness) {
  Rng rng(42);
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(5));
    const int k = 1 + static_cast<int>(rng.uniform_index(5));
    LinearProgram lp;
    lp.c = Vec(n);
    lp.a_ub = Mat(k, n);
    lp.b_ub = Vec(k);
    for (int c = 0; c < n; ++c) lp.c[c] = rng.uniform(-1.0, 1.0);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < n; ++c) lp.a_ub(r, c) = rng.uniform(-0.5, 1.0);
      lp.b_ub[r] = rng.uniform(-0.3, 1.0);
    }
    lp.a_eq = Mat::Ones(1, n);
    lp.b_eq = Vec::Ones(1);
    const LpResult res = solve_linear_program(lp);
    if (res.status != LpStatus::kOptimal) continue;
    ++optimal;
    const Vec slack = lp.b_ub - lp.a_ub * res.x;
    ASSERT_GE(slack.minCoeff(), -1e-9);
    ASSERT_NEAR(res.x.sum(), 1.0, 1e-9);
    ASSERT_GE(res.x.minCoeff(), 0.0);
    ASSERT_GE(res.dual_ub.minCoeff(), 0.0);
    const Vec reduced = lp.a_ub.transpose() * res.dual_ub + lp.a_eq.transpose() * res.dual_eq - lp.c;
    ASSERT_GE(reduced.minCoeff(), -1e-9);
    ASSERT_NEAR(lp.b_ub.dot(res.dual_ub) + lp.b_eq.dot(res.dual_eq), res.value, 1e-9);
    for (int r = 0; r < k; ++r) ASSERT_LE(res.dual_ub[r] * slack[r], 1e-9);
  }
  EXPECT_GT(optimal, 100);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
  LinearProgram infeasible;
  infeasible.c = Vec::Ones(2);
  infeasible.a_ub = Mat::Ones(1, 2);
  infeasible.b_ub = Vec::Constant(1, -1.0);
  EXPECT_EQ(solve_linear_program(infeasible).status, LpStatus::kInfeasible);

  LinearProgram unbounded;
  unbounded.c = Vec::Ones(2);
  unbounded.a_ub = Mat(1, 2);
  unbounded.a_ub << 1.0, -1.0;
  unbounded.b_ub = Vec::Ones(1);
  EXPECT_EQ(solve_linear_program(unbounded).status, LpStatus::kUnbounded);

  LinearProgram bad;
  bad.c = Vec::Ones(2);
  bad.a_ub = Mat::Ones(1, 3);
  bad.b_ub = Vec::Ones(1);
  EXPECT_THROW(solve_linear_program(bad), ContractError);
}

TEST(Simplex, RedundantEqualitiesAreHandled) {
  LinearProgram lp;
  lp.c = Vec(3);
  lp.c << 1.0, 2.0, 0.0;
  lp.a_eq = Mat(2, 3);
  lp.a_eq << 1.0, 1.0, 1.0,
             2.0, 2.0, 2.0;
  lp.b_eq = Vec(2);
  lp.b_eq << 1.0, 2.0;
  const LpResult res = solve_linear_program(lp);
  ASSERT_EQ(res.status, LpStatus::kOptimal);
  EXPECT_NEAR(res.value, 2.0, 1e-12);
}

// Optimistic-step LP captured from a long run: near-parallel cutting planes
// once led the tableau onto a tiny pivot and an infeasible "optimum".
TEST(Simplex, DegenerateCutsRegression) {
  std::ifstream in(std::string(BWCR_TEST_DATA) + "/degenerate_cuts_lp.txt");
  ASSERT_TRUE(in.good());
  std::map<std::string, std::vector<std::vector<double>>> blocks;
  std::string line, current;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (std::isalpha(static_cast<unsigned char>(line[0]))) {
      current = line;
      continue;
    }
    std::istringstream ss(line);
    std::vector<double> row;
    for (double v; ss >> v;) row.push_back(v);
    blocks[current].push_back(row);
  }
  auto to_mat = [&](const std::string& name) {
    const auto& rows = blocks.at(name);
    Mat m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    return m;
  };
  LinearProgram lp;
  lp.c = to_mat("C").row(0).transpose();
  lp.a_ub = to_mat("AUB");
  lp.b_ub = to_mat("BUB").row(0).transpose();
  lp.a_eq = to_mat("AEQ");
  lp.b_eq = to_mat("BEQ").row(0).transpose();
  const LpResult res = solve_linear_program(lp);
  ASSERT_EQ(res.status, LpStatus::kOptimal);
  EXPECT_NEAR(res.value, 3.0, 1e-6);
  EXPECT_NEAR(res.x.head(5).sum(), 1.0, 1e-9);
  EXPECT_GE((lp.b_ub - lp.a_ub * res.x).minCoeff(), -1e-6);
}

TEST(UcbStep, MatchesSimplexGrid) {
  Rng rng(43);
  const std::vector<SeparableTerm> terms = {{Kind::kLog1p, 1.0, 0.5}, {Kind::kQuadratic, 1.0, 0.4}};
  Mat a(1, 2);
  a << 1.0, 1.0;
  const std::vector<ConvexSet> sets = {
      ConvexSet::halfspaces(a, Vec::Constant(1, 0.9)),
      ConvexSet::box(Vec::Constant(2, 0.2), Vec::Constant(2, 0.6)),
  };
  for (int trial = 0; trial < 20; ++trial) {
    const Hypercube hc = random_hypercube(2, 3, 0.15, rng);
    const ConvexSet& s = sets[trial % 2];
    const UcbStepResult mine = solve_ucb_step(hc, Objective::separable(terms), s);
    const oracle::GridStep grid = oracle::ucb_step_grid(hc, terms, s, 100);
    if (!grid.feasible) continue;
    ASSERT_TRUE(mine.feasible);
    EXPECT_GE(mine.value, grid.value - 1e-7);
    EXPECT_NEAR(mine.value, grid.value, 1e-2);
    EXPECT_TRUE(s.contains(mine.feasible_point, 1e-6));
    const Vec lo = hc.lcb * mine.policy.weights, hi = hc.ucb * mine.policy.weights;
    EXPECT_TRUE(((mine.optimistic_point - lo).array() >= -1e-7).all());
    EXPECT_TRUE(((hi - mine.optimistic_point).array() >= -1e-7).all());
  }
}

TEST(UcbStep, FeasibleWhenTruthIsCoveredAndFeasible) {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const Hypercube hc = random_hypercube(2, 4, 0.2, rng);
    // A truth inside the bounds, and a target box around one of its mixtures.
    const Mat truth = (hc.lcb + hc.ucb) / 2;
    const Vec x = truth * PolicyDistribution::uniform(4).weights;
    const ConvexSet s = ConvexSet::box((x.array() - 0.01).matrix(), (x.array() + 0.01).matrix());
    const UcbStepResult res = solve_ucb_step(hc, std::nullopt, s);
    ASSERT_TRUE(res.feasible);
    ASSERT_NO_THROW(res.policy.validate());
  }
}

TEST(UcbStep, ReportsInfeasibility) {
  const Hypercube hc = Hypercube::degenerate(Mat::Constant(1, 2, 0.8));
  const ConvexSet s = ConvexSet::box(Vec::Zero(1), Vec::Constant(1, 0.5));
  EXPECT_FALSE(solve_ucb_step(hc, std::nullopt, s).feasible);
}

TEST(UcbStep, SaddleEvaluationsAgreeWithExactSolver) {
  Rng rng(45);
  const Objective f =
      Objective::separable({{Kind::kLog1p, 1.0, 0.5}, {Kind::kQuadratic, 1.0, 0.35}});
  const ConvexSet box = ConvexSet::unit_box(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Hypercube hc = random_hypercube(2, 3, 0.2, rng);
    const UcbStepResult res = solve_ucb_step(hc, f, box);
    ASSERT_TRUE(res.feasible);
    EXPECT_NEAR(psi_saddle(hc, f, res.policy.weights), res.value, 1e-3);
    EXPECT_LE(g_saddle(hc, box, Norm::kL2, res.policy.weights), 1e-6);
  }
}

TEST(UcbStep, LinearObjectiveNeedsNoCuts) {
  UcbStepSolver solver(Objective::linear(Vec::Ones(2)), ConvexSet::unit_box(2));
  Mat v(2, 2);
  v << 0.2, 0.6, 0.3, 0.5;
  const UcbStepResult res = solver.solve(Hypercube::degenerate(v));
  EXPECT_EQ(solver.cut_count(), 0u);
  EXPECT_NEAR(res.value, 1.1, 1e-12);
  EXPECT_NEAR(res.policy.weights[1], 1.0, 1e-12);
}

TEST(Oco, OgdStaysInTheDualBall) {
  Rng rng(46);
  for (Norm dual : {Norm::kL2, Norm::kL1, Norm::kLinf}) {
    OcoState s = OcoState::make(OcoKind::kOgd, 3, dual, 2.0, 1000);
    for (int t = 0; t < 1000; ++t) {
      Vec g(3);
      for (int k = 0; k < 3; ++k) g[k] = rng.uniform(-1.0, 1.0);
      s = ogd_step(s, g);
      ASSERT_LE(norm_of(s.theta, dual), 2.0 + 1e-12);
    }
  }
}

TEST(Oco, OgdStepSizeSchedule) {
  OcoState s = OcoState::make(OcoKind::kOgd, 4, Norm::kL2, 3.0, 100);
  s.t = 9;
  EXPECT_NEAR(s.ogd_eta(), (3.0 / 2.0) / 3.0, 1e-15);
  s.fixed_eta = 0.25;
  EXPECT_DOUBLE_EQ(s.ogd_eta(), 0.25);
}

TEST(Oco, OgdRegretOnLinearLosses) {
  // Best fixed point in hindsight for linear losses on the L2 ball: -L G / |G|.
  const int d = 3, T = 4000;
  const double L = 1.0, G = std::sqrt(3.0);
  Rng rng(47);
  OcoState s = OcoState::make(OcoKind::kOgd, d, Norm::kL2, L, T);
  Vec sum = Vec::Zero(d);
  double incurred = 0.0;
  for (int t = 0; t < T; ++t) {
    Vec a(d);
    for (int k = 0; k < d; ++k) a[k] = std::clamp(0.3 * (k - 1) + rng.uniform(-1.0, 1.0), -1.0, 1.0);
    incurred += s.theta.dot(a);
    sum += a;
    s = ogd_step(s, a);
  }
  const double best = -L * sum.norm();
  EXPECT_LE(incurred - best, 1.5 * L * G * std::sqrt(double(T)));
}

TEST(Oco, EntropicStaysOnTheL1Ball) {
  Rng rng(48);
  OcoState s = OcoState::make(OcoKind::kEntropic, 4, Norm::kL1, 1.5, 500);
  OcoState simplex = OcoState::make(OcoKind::kEntropic, 4, Norm::kL1, 1.5, 500, true);
  for (int t = 0; t < 500; ++t) {
    Vec g(4);
    for (int k = 0; k < 4; ++k) g[k] = rng.bernoulli(0.5) ? 1.0 : -1.0;
    s = entropic_step(s, g);
    simplex = entropic_step(simplex, g);
    ASSERT_LE(s.theta.lpNorm<1>(), 1.5 + 1e-12);
    ASSERT_GE(simplex.theta.minCoeff(), 0.0);
    ASSERT_NEAR(simplex.theta.sum(), 1.5, 1e-12);
  }
  EXPECT_THROW(OcoState::make(OcoKind::kEntropic, 2, Norm::kL2, 1.0, 10), UnsupportedError);
}

TEST(Oco, EntropicConcentratesOnTheBestDirection) {
  OcoState s = OcoState::make(OcoKind::kEntropic, 2, Norm::kL1, 1.0, 2000);
  Vec g(2);
  g << 1.0, 0.0;
  for (int t = 0; t < 2000; ++t) s = oco_step(s, g);
  EXPECT_LT(s.theta[0], -0.9);
}

}  // namespace
}  // namespace bwcr
