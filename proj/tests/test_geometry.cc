#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bwcr/geometry.h"
#include "oracles.h"

namespace bwcr {
namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ConvexSet triangle() {
  Mat pts(2, 3);
  pts << 0.0, 1.0, 0.0,
         0.0, 0.0, 1.0;
  return ConvexSet::vertices(pts, true);
}

ConvexSet triangle_halfspace() {
  Mat a(1, 2);
  a << 1.0, 1.0;
  return ConvexSet::halfspaces(a, Vec::Ones(1));
}

// Nearest point of the triangle on a grid of step 1e-3, by brute force.
struct GridNearest {
  Vec point;
  double dist = std::numeric_limits<double>::infinity();
};

GridNearest triangle_grid_nearest(const Vec& x, Norm norm) {
  GridNearest best;
  const int n = 1000;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      const Vec y = vec2(i / double(n), j / double(n));
      const double dist = norm_of(x - y, norm);
      if (dist < best.dist) {
        best.dist = dist;
        best.point = y;
      }
    }
  }
  return best;
}

TEST(Norms, ValuesAndDuals) {
  const Vec x = vec2(3.0, -4.0);
  EXPECT_DOUBLE_EQ(norm_of(x, Norm::kL2), 5.0);
  EXPECT_DOUBLE_EQ(norm_of(x, Norm::kL1), 7.0);
  EXPECT_DOUBLE_EQ(norm_of(x, Norm::kLinf), 4.0);
  EXPECT_EQ(dual_of(Norm::kL1), Norm::kLinf);
  EXPECT_EQ(dual_of(Norm::kLinf), Norm::kL1);
  EXPECT_EQ(dual_of(Norm::kL2), Norm::kL2);
  EXPECT_DOUBLE_EQ(NormPair{Norm::kL2}.ones_norm(4), 2.0);
  EXPECT_DOUBLE_EQ(NormPair{Norm::kL1}.ones_norm(4), 4.0);
  EXPECT_THROW(norm_from_string("l3"), ConfigError);
}

TEST(Norms, BallProjectionLandsOnBallAndIsNearest) {
  Rng rng(21);
  for (Norm norm : {Norm::kL2, Norm::kL1, Norm::kLinf}) {
    for (int trial = 0; trial < 200; ++trial) {
      Vec x(3);
      for (int k = 0; k < 3; ++k) x[k] = rng.uniform(-3.0, 3.0);
      const Vec p = project_to_ball(x, norm, 1.0);
      ASSERT_LE(norm_of(p, norm), 1.0 + 1e-12);
      if (norm_of(x, norm) <= 1.0) {
        ASSERT_EQ(p, x);
      } else if (norm == Norm::kL2) {
        ASSERT_NEAR((x / x.norm() - p).norm(), 0.0, 1e-12);
      }
      // Euclidean nearest point: no random ball point is closer.
      for (int k = 0; k < 20; ++k) {
        Vec q(3);
        for (int c = 0; c < 3; ++c) q[c] = rng.uniform(-1.0, 1.0);
        q = q / std::max(1.0, norm_of(q, norm));
        ASSERT_LE((x - p).norm(), (x - q).norm() + 1e-9);
      }
    }
  }
}

TEST(Projection, TriangleCornerMatchesGridOracle) {
  const Vec x = vec2(1.0, 1.0);
  const GridNearest grid = triangle_grid_nearest(x, Norm::kL2);
  for (const ConvexSet& s : {triangle(), triangle_halfspace()}) {
    const Vec p = s.project(x);
    EXPECT_NEAR(p[0], 0.5, 1e-9);
    EXPECT_NEAR(p[1], 0.5, 1e-9);
    EXPECT_NEAR((p - grid.point).norm(), 0.0, 1e-3);
    EXPECT_NEAR(s.distance(x), std::sqrt(0.5), 1e-9);
  }
}

TEST(Projection, NonEuclideanDistancesMatchGridOracle) {
  const ConvexSet s = triangle_halfspace();
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = vec2(rng.uniform(), rng.uniform());
    for (Norm norm : {Norm::kL1, Norm::kLinf}) {
      const GridNearest grid = triangle_grid_nearest(x, norm);
      EXPECT_NEAR(s.distance(x, norm), grid.dist, 2e-3);
      EXPECT_TRUE(s.contains(s.project(x, norm), 1e-7));
    }
  }
  EXPECT_NEAR(s.distance(vec2(1.0, 1.0), Norm::kL1), 1.0, 1e-9);
  EXPECT_NEAR(s.distance(vec2(1.0, 1.0), Norm::kLinf), 0.5, 1e-9);
}

TEST(Projection, HalfspaceBoxMatchesClosedFormOracle) {
  Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    Vec a(4), x(4);
    for (int k = 0; k < 4; ++k) {
      a[k] = rng.uniform(-1.0, 1.0);
      x[k] = rng.uniform(0.0, 1.0);
    }
    const double b = rng.uniform(0.0, 1.0) + std::max(0.0, a.minCoeff());
    // Inside the unit box the box never binds when the halfspace projection
    // already lands in it; compare only those cases against the oracle.
    const Vec exact = oracle::halfspace_projection(x, a, b);
    if ((exact.array() < 0.0).any() || (exact.array() > 1.0).any()) continue;
    const Vec p = project_halfspace_box(x, a, b, Vec::Zero(4), Vec::Ones(4));
    ASSERT_NEAR((p - exact).norm(), 0.0, 1e-9);
    ASSERT_NEAR((x - p).norm(), oracle::halfspace_distance(x, a, b), 1e-9);
  }
}

TEST(Projection, IdempotentAndNonExpansive) {
  Mat a(2, 3);
  a << 1.0, 1.0, 0.0,
       0.0, 1.0, 2.0;
  Vec b(2);
  b << 1.2, 1.5;
  Mat pts = Mat::Random(3, 6).cwiseAbs();
  const std::vector<ConvexSet> sets = {
      ConvexSet::box(Vec::Constant(3, 0.2), Vec::Constant(3, 0.6)),
      ConvexSet::halfspaces(a, b),
      ConvexSet::vertices(pts),
  };
  Rng rng(24);
  for (const ConvexSet& s : sets) {
    for (int trial = 0; trial < 100; ++trial) {
      Vec x(3), y(3);
      for (int k = 0; k < 3; ++k) {
        x[k] = rng.uniform(-0.5, 1.5);
        y[k] = rng.uniform(-0.5, 1.5);
      }
      const Vec px = s.project(x);
      const Vec py = s.project(y);
      ASSERT_TRUE(s.contains(px, 1e-7));
      ASSERT_NEAR((s.project(px) - px).norm(), 0.0, 1e-7);
      ASSERT_LE((px - py).norm(), (x - y).norm() + 1e-7);
      ASSERT_GE(s.distance(x), 0.0);
      // Obtuse-angle characterization of the Euclidean projection.
      for (int k = 0; k < 5; ++k) {
        Vec z(3);
        for (int c = 0; c < 3; ++c) z[c] = rng.uniform();
        const Vec pz = s.project(z);
        ASSERT_LE((x - px).dot(pz - px), 1e-6);
      }
    }
  }
}

TEST(Support, VerticesAndBoxes) {
  const ConvexSet t = triangle();
  EXPECT_DOUBLE_EQ(t.support(vec2(2.0, 1.0)), 2.0);
  EXPECT_DOUBLE_EQ(t.support(vec2(-1.0, -1.0)), 0.0);
  const ConvexSet box = ConvexSet::box(vec2(0.1, 0.2), vec2(0.5, 0.9));
  EXPECT_DOUBLE_EQ(box.support(vec2(1.0, -1.0)), 0.5 - 0.2);
  const Vec sp = triangle_halfspace().support_point(vec2(1.0, 3.0));
  EXPECT_NEAR(sp[0], 0.0, 1e-12);
  EXPECT_NEAR(sp[1], 1.0, 1e-12);
}

TEST(Support, UpperBoundsEveryMemberOfTheSet) {
  const ConvexSet s = triangle_halfspace();
  Rng rng(25);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec theta = vec2(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double h = s.support(theta);
    const Vec x = vec2(rng.uniform(), rng.uniform());
    if (s.contains(x)) {
      ASSERT_LE(theta.dot(x), h + 1e-12);
    }
    ASSERT_NEAR(theta.dot(s.support_point(theta)), h, 1e-9);
  }
}

TEST(Shrink, ScalesDownwardClosedSets) {
  const ConvexSet box = ConvexSet::box(Vec::Zero(2), vec2(0.8, 0.6)).shrink(0.1);
  EXPECT_NEAR(box.hi()[0], 0.72, 1e-15);
  EXPECT_NEAR(box.hi()[1], 0.54, 1e-15);
  const ConvexSet half = triangle_halfspace().shrink(0.5);
  EXPECT_NEAR(half.b()[0], 0.5, 1e-15);
  EXPECT_TRUE(half.contains(vec2(0.25, 0.25)));
  EXPECT_FALSE(half.contains(vec2(0.3, 0.3)));
  EXPECT_THROW(ConvexSet::box(vec2(0.1, 0.0), vec2(0.5, 0.5)).shrink(0.1), UnsupportedError);
  EXPECT_THROW(box.shrink(1.5), ContractError);
}

TEST(Sets, ConstructionErrors) {
  EXPECT_THROW(ConvexSet::box(vec2(0.6, 0.0), vec2(0.5, 1.0)), ContractError);
  Mat a(1, 2);
  a << -1.0, -1.0;
  EXPECT_THROW(ConvexSet::halfspaces(a, Vec::Constant(1, -3.0)), ContractError);
}

TEST(SmoothedDistance, LinearRegime) {
  const ConvexSet s = ConvexSet::box(Vec::Zero(1), Vec::Constant(1, 0.5));
  const SmoothedDistance sd = smoothed_distance(Vec::Constant(1, 0.8), s, 0.1);
  EXPECT_NEAR(sd.value, 0.25, 1e-15);
  EXPECT_NEAR(sd.gradient[0], 1.0, 1e-15);
}

TEST(SmoothedDistance, QuadraticRegime) {
  const ConvexSet s = ConvexSet::box(Vec::Zero(1), Vec::Constant(1, 0.5));
  const SmoothedDistance sd = smoothed_distance(Vec::Constant(1, 0.55), s, 0.1);
  EXPECT_NEAR(sd.value, 0.0125, 1e-15);
  EXPECT_NEAR(sd.gradient[0], 0.5, 1e-12);
}

TEST(SmoothedDistance, MatchesDualMaximumOnAGrid) {
  // max over theta in [-1,1] of theta z - h_S(theta) - sigma/2 theta^2, S = [0, 0.5].
  const ConvexSet s = ConvexSet::box(Vec::Zero(1), Vec::Constant(1, 0.5));
  const double sigma = 0.2;
  for (double z = -0.5; z <= 1.5; z += 0.0625) {
    double best = -1e9;
    for (int k = 0; k <= 20000; ++k) {
      const double th = -1.0 + k * 1e-4;
      best = std::max(best, th * z - std::max(0.0, 0.5 * th) - 0.5 * sigma * th * th);
    }
    EXPECT_NEAR(smoothed_distance(Vec::Constant(1, z), s, sigma).value, best, 1e-7) << z;
  }
}

TEST(SmoothedDistance, SandwichesTheDistance) {
  const ConvexSet s = triangle_halfspace();
  Rng rng(26);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec z = vec2(rng.uniform(), rng.uniform());
    const double sigma = rng.uniform(0.01, 0.5);
    const double v = smoothed_distance(z, s, sigma).value;
    const double dist = s.distance(z);
    ASSERT_LE(v, dist + 1e-12);
    ASSERT_GE(v, dist - sigma / 2 - 1e-12);
  }
}

}  // namespace
}  // namespace bwcr
