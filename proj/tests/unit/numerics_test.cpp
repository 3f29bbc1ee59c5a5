#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "monotx/error.hpp"
#include "monotx/numerics.hpp"
#include "test_util.hpp"

namespace monotx {
namespace {

TEST(LogAdd, ZeroIsIdentity) {
  EXPECT_EQ(log_add(kLogZero, -1.25), -1.25);
  EXPECT_EQ(log_add(-1.25, kLogZero), -1.25);
  EXPECT_EQ(log_add(kLogZero, kLogZero), kLogZero);
}

TEST(LogAdd, HalvesSumToOne) {
  EXPECT_NEAR(log_add(std::log(0.5), std::log(0.5)), 0.0, 1e-15);
}

TEST(LogAdd, QuarterPlusHalf) {
  EXPECT_NEAR(log_add(std::log(0.25), std::log(0.5)), std::log(0.75), 1e-15);
  EXPECT_NEAR(log_add(std::log(0.25), std::log(0.5)), -0.28768207245178, 1e-12);
}

TEST(LogAdd, Commutative) {
  EXPECT_EQ(log_add(-3.0, -0.1), log_add(-0.1, -3.0));
}

TEST(LogAdd, AssociativeOnRandomTriples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lp(std::log(1e-30), 0.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = lp(rng), b = lp(rng), c = lp(rng);
    EXPECT_NEAR(log_add(log_add(a, b), c), log_add(a, log_add(b, c)), 1e-12);
  }
}

TEST(LogAdd, LogProbWrapper) {
  const LogProb sum = log_add(LogProb::from_prob(0.25), LogProb::from_prob(0.5));
  EXPECT_NEAR(sum.prob(), 0.75, 1e-15);
  EXPECT_TRUE(log_add(LogProb::zero(), LogProb::zero()).is_zero());
}

TEST(LogProbType, RejectsNanAndPositive) {
  EXPECT_THROW(LogProb(std::nan("")), ValidationError);
  EXPECT_THROW(LogProb(0.5), ValidationError);
  EXPECT_NO_THROW(LogProb(kLogZero));
  EXPECT_NO_THROW(LogProb(1e-12));
}

TEST(LogSumExp, EmptyAndAllZero) {
  EXPECT_EQ(log_sum_exp({}), kLogZero);
  const std::vector<double> zeros = {kLogZero, kLogZero};
  EXPECT_EQ(log_sum_exp(zeros), kLogZero);
}

TEST(LogSoftmax, EqualLogits) {
  const std::vector<double> row = {0.0, 0.0};
  const auto out = log_softmax_rows(row, 2);
  EXPECT_NEAR(out[0], std::log(0.5), 1e-15);
  EXPECT_NEAR(out[1], std::log(0.5), 1e-15);
}

TEST(LogSoftmax, ClosedForm) {
  const std::vector<double> row = {std::log(2.0), 0.0};
  const auto out = log_softmax_rows(row, 2);
  EXPECT_NEAR(out[0], std::log(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(out[1], std::log(1.0 / 3.0), 1e-15);
}

TEST(LogSoftmax, LargeLogitsDoNotOverflow) {
  const std::vector<double> row = {1000.0, 0.0};
  const auto out = log_softmax_rows(row, 2);
  EXPECT_TRUE(std::isfinite(out[0]));
  EXPECT_NEAR(out[0], 0.0, 1e-12);
  EXPECT_NEAR(out[1], -1000.0, 1e-9);
}

TEST(LogSoftmax, RejectsNan) {
  const std::vector<double> row = {0.0, std::nan("")};
  try {
    log_softmax_rows(row, 2);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError &e) {
    EXPECT_EQ(e.code(), "nan-logit");
  }
}

TEST(LogSoftmax, Idempotent) {
  std::mt19937_64 rng(3);
  const JoinerLattice lat = testing::random_lattice(rng, 4, 3, 5, 0, 3.0);
  const auto twice = log_softmax_rows(lat.logprobs(), 5);
  for (std::size_t i = 0; i < twice.size(); ++i) {
    EXPECT_NEAR(twice[i], lat.logprobs()[i], 1e-9);
  }
}

TEST(JoinerLatticeType, RowsNormalized) {
  std::mt19937_64 rng(11);
  const JoinerLattice lat = testing::random_lattice(rng, 5, 2, 4, 1, 4.0);
  for (int t = 0; t < lat.frames(); ++t) {
    for (int u = 0; u < lat.rows(); ++u) {
      EXPECT_NEAR(log_sum_exp(lat.logprob_row(t, u)), 0.0, 1e-9);
    }
  }
}

TEST(JoinerLatticeType, UniformRows) {
  const JoinerLattice lat = JoinerLattice::uniform(2, 1, 4);
  EXPECT_EQ(lat.size(), 2u * 2u * 4u);
  EXPECT_NEAR(lat.logprob(1, 1, 3), std::log(0.25), 1e-15);
}

TEST(JoinerLatticeType, RejectsBadShapes) {
  EXPECT_THROW(JoinerLattice(0, 0, 2, 0, {}), ValidationError);
  EXPECT_THROW(JoinerLattice(1, 0, 1, 0, {0.0}), ValidationError);
  EXPECT_THROW(JoinerLattice(1, 0, 2, 2, {0.0, 0.0}), ValidationError);
  EXPECT_THROW(JoinerLattice(1, 0, 2, 0, {0.0}), ValidationError);
}

TEST(JoinerLatticeType, LogprobsArePureFunctionOfLogits) {
  std::mt19937_64 rng(5);
  const JoinerLattice a = testing::random_lattice(rng, 3, 2, 3);
  const JoinerLattice b = a.with_logits(a.logits());
  EXPECT_EQ(a.logprobs(), b.logprobs());
}

}  // namespace
}  // namespace monotx
