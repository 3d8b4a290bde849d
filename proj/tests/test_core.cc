#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "bwcr/core.h"
#include "bwcr/rng.h"

namespace bwcr {
namespace {

TEST(Rng, EngineMatchesStandardSequence) {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next_u64();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, SubstreamsAreReproducibleAndDistinct) {
  Rng a = Rng::for_stream(7, 3, Stream::kArms);
  Rng b = Rng::for_stream(7, 3, Stream::kArms);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    for (std::uint64_t run : {0ULL, 1ULL}) {
      for (Stream s : {Stream::kInstance, Stream::kArms, Stream::kObservations, Stream::kAux}) {
        firsts.insert(Rng::for_stream(seed, run, s).next_u64());
      }
    }
  }
  EXPECT_EQ(firsts.size(), 24u);
}

TEST(Rng, UniformStaysInHalfOpenUnitInterval) {
  Rng rng(11);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng(12);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_index(7)];
  for (int c : counts) EXPECT_NEAR(c / 70000.0, 1.0 / 7.0, 0.01);
  EXPECT_THROW(rng.uniform_index(0), std::invalid_argument);
}

TEST(Rng, BetaMomentsMatch) {
  Rng rng(13);
  const double a = 2.0, b = 6.0;
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.beta(a, b);
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, a / (a + b), 0.003);
  EXPECT_NEAR(var, a * b / ((a + b) * (a + b) * (a + b + 1)), 0.001);
}

TEST(Instance, RejectsEntriesOutsideUnitInterval) {
  Mat bad(1, 2);
  bad << 0.5, 1.2;
  EXPECT_THROW(InstanceModel{bad}, ContractError);
}

TEST(Instance, BernoulliSampleMean) {
  Mat v(1, 2);
  v << 0.25, 0.75;
  const InstanceModel inst(v);
  Rng rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += sample_observation(inst, 0, rng)[0];
  EXPECT_NEAR(sum / 100000.0, 0.25, 0.01);
}

TEST(Instance, OutcomesAreBinaryFixedOrBounded) {
  Mat v(2, 2);
  v << 0.3, 0.6, 0.0, 1.0;
  Rng rng(2);
  const InstanceModel bern(v);
  const InstanceModel fixed(v, OutcomeKind::kFixed);
  const InstanceModel beta(v, OutcomeKind::kScaledBeta, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec b = sample_observation(bern, i % 2, rng);
    for (double x : {b[0], b[1]}) ASSERT_TRUE(x == 0.0 || x == 1.0);
    EXPECT_EQ(sample_observation(fixed, i % 2, rng), v.col(i % 2));
    const Vec s = sample_observation(beta, i % 2, rng);
    ASSERT_TRUE((s.array() >= 0.0).all() && (s.array() <= 1.0).all());
    // Degenerate means stay deterministic.
    ASSERT_EQ(s[1], v(1, i % 2));
  }
  EXPECT_THROW(sample_observation(bern, 2, rng), std::out_of_range);
}

TEST(Instance, ContextualMeanIsInnerProduct) {
  ContextualModel model;
  model.n = 2;
  Vec w(2);
  w << 0.5, 0.25;
  model.weights = {w};
  Vec x0(2), x1(2);
  x0 << 1.0, 0.0;
  x1 << 0.4, 1.0;
  model.contexts = {{x0, x1}};
  const InstanceModel inst = InstanceModel::from_contexts(model);
  ASSERT_TRUE(inst.is_contextual());
  EXPECT_DOUBLE_EQ(inst.mean()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(inst.mean()(0, 1), 0.45);
}

TEST(Policy, ValidationRules) {
  EXPECT_NO_THROW(PolicyDistribution::uniform(4).validate());
  PolicyDistribution short_mass{Vec::Constant(2, 0.3), false};
  EXPECT_THROW(short_mass.validate(), ContractError);
  short_mass.allow_idle = true;
  EXPECT_NO_THROW(short_mass.validate());
  PolicyDistribution negative{Vec::Zero(2), false};
  negative.weights << 1.5, -0.5;
  EXPECT_THROW(negative.validate(), ContractError);
  EXPECT_THROW(PolicyDistribution::point_mass(3, 3), std::out_of_range);
  EXPECT_DOUBLE_EQ(PolicyDistribution::idle(3).mass(), 0.0);
}

TEST(Policy, DrawFrequencyMatchesWeights) {
  Rng rng(3);
  const PolicyDistribution p{Vec::Constant(2, 0.5), false};
  int zeros = 0;
  for (int i = 0; i < 100000; ++i) zeros += *draw_arm(p, rng) == 0;
  EXPECT_NEAR(zeros / 100000.0, 0.5, 0.01);
}

TEST(Policy, IdleMassProducesIdleSteps) {
  Rng rng(4);
  PolicyDistribution p{Vec::Constant(2, 0.25), true};
  int idle = 0;
  for (int i = 0; i < 100000; ++i) idle += !draw_arm(p, rng).has_value();
  EXPECT_NEAR(idle / 100000.0, 0.5, 0.01);
  EXPECT_FALSE(draw_arm(PolicyDistribution::idle(2), rng).has_value());
}

TEST(History, ColumnsStayAligned) {
  RunHistory h;
  h.append(0, Vec::Zero(2), PolicyDistribution::uniform(2));
  h.append(std::nullopt, Vec::Zero(2), PolicyDistribution::idle(2));
  EXPECT_EQ(h.size(), 2u);
  EXPECT_NO_THROW(h.validate());
  h.arms.pop_back();
  EXPECT_THROW(h.validate(), ContractError);
}

}  // namespace
}  // namespace bwcr
