#include <gtest/gtest.h>

#include <cmath>

#include "evgrad/errors.hpp"
#include "evgrad/policy.hpp"
#include "support.hpp"

namespace evgrad {
namespace {

using testing::affine_net;
using testing::random_net;
using testing::uniform_vector;

// Logits equal to the biases regardless of the (one-dimensional) state.
SoftmaxPolicy fixed_logits(double a, double b) { return SoftmaxPolicy(affine_net(1, 2, {0.0, 0.0}, {a, b})); }

const Vector unit_state = Vector::Ones(1);

TEST(ActionLogProbs, UniformLogits) {
  const Vector lp = fixed_logits(0.0, 0.0).action_log_probs(unit_state);
  EXPECT_NEAR(lp[0], -std::log(2.0), 1e-15);
  EXPECT_NEAR(lp[1], -std::log(2.0), 1e-15);
}

TEST(ActionLogProbs, LargeLogitsDoNotOverflow) {
  const Vector lp = fixed_logits(1000.0, 0.0).action_log_probs(unit_state);
  EXPECT_TRUE(lp.allFinite());
  EXPECT_NEAR(lp[0], 0.0, 1e-300);
  EXPECT_NEAR(lp[1], -1000.0, 1e-9);
}

TEST(ActionLogProbs, ShiftInvariant) {
  const Vector a = fixed_logits(0.3, -1.2).action_log_probs(unit_state);
  const Vector b = fixed_logits(0.3 + 17.0, -1.2 + 17.0).action_log_probs(unit_state);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ActionProbs, NormalizedAndInterior) {
  RandomStream rng(1);
  for (int i = 0; i < 100; ++i) {
    const SoftmaxPolicy policy(random_net(rng, {3, 5, 4}, Activation::mish, 2.0));
    const Vector p = policy.action_probs(uniform_vector(rng, 3, 3.0));
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GT(p.minCoeff(), 0.0);
    EXPECT_LT(p.maxCoeff(), 1.0);
  }
}

TEST(SampleAction, DegenerateLogitsPickTheLargest) {
  const SoftmaxPolicy policy = fixed_logits(1000.0, 0.0);
  RandomStream rng(2);
  int zeros = 0;
  for (int i = 0; i < 10'000; ++i) zeros += policy.sample_action(unit_state, rng) == 0;
  EXPECT_GE(zeros, 9990);
}

TEST(SampleAction, UniformFrequencyWithinFourStandardErrors) {
  const SoftmaxPolicy policy = fixed_logits(0.0, 0.0);
  RandomStream rng(3);
  const int n = 100'000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += policy.sample_action(unit_state, rng) == 1;
  const double se = std::sqrt(0.25 / n);
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.5, 4.0 * se);
}

TEST(SampleAction, SameStreamSameAction) {
  RandomStream rng(4);
  const SoftmaxPolicy policy(random_net(rng, {2, 3}, Activation::tanh));
  const Vector s = uniform_vector(rng, 2, 1.0);
  RandomStream a(99), b(99);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(policy.sample_action(s, a), policy.sample_action(s, b));
}

TEST(ScoreGradient, BanditAtUniform) {
  const SoftmaxPolicy policy(affine_net(1, 2, {0.0, 0.0}, {0.0, 0.0}));
  const ParamVector g = policy.score_gradient(unit_state, 0);
  ASSERT_EQ(g.size(), 4);
  EXPECT_DOUBLE_EQ(g[0], 0.5);
  EXPECT_DOUBLE_EQ(g[1], -0.5);
}

TEST(ScoreGradient, MatchesFiniteDifferences) {
  RandomStream rng(5);
  for (int i = 0; i < 100; ++i) {
    const Activation act = std::array{Activation::tanh, Activation::relu, Activation::mish}[i % 3];
    const SoftmaxPolicy policy(random_net(rng, {3, 4, 3}, act));
    const Vector s = uniform_vector(rng, 3, 2.0);
    const std::size_t a = static_cast<std::size_t>(i % 3);
    const ParamVector numeric = finite_diff_grad(
        [&](const ParamVector& p) { return SoftmaxPolicy(Mlp(policy.net().shape(), p)).action_log_probs(s)[a]; },
        policy.theta(), 1e-6);
    EXPECT_LT(relative_error(policy.score_gradient(s, a), numeric), 1e-5);
  }
}

TEST(ScoreGradient, ScoreIdentity) {
  RandomStream rng(6);
  for (int i = 0; i < 50; ++i) {
    const SoftmaxPolicy policy(random_net(rng, {4, 6, 3}, Activation::mish, 1.5));
    const Vector s = uniform_vector(rng, 4, 2.0);
    const Vector p = policy.action_probs(s);
    ParamVector sum = ParamVector::Zero(static_cast<Eigen::Index>(policy.net().param_count()));
    for (std::size_t a = 0; a < 3; ++a) sum += p[static_cast<Eigen::Index>(a)] * policy.score_gradient(s, a);
    EXPECT_LT(sum.cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ScoreGradient, DotAndAccumulateAgreeWithDenseScore) {
  RandomStream rng(7);
  const SoftmaxPolicy policy(random_net(rng, {3, 5, 2}, Activation::mish));
  const Vector s = uniform_vector(rng, 3, 1.0);
  const ParamVector dir = uniform_vector(rng, static_cast<Eigen::Index>(policy.net().param_count()), 1.0);
  const ParamVector u = policy.score_gradient(s, 1);
  EXPECT_NEAR(policy.score_dot(s, 1, dir), u.dot(dir), 1e-12);
  ParamVector acc = dir;
  policy.accumulate_score(s, 1, 2.0, acc);
  EXPECT_LT((acc - (dir + 2.0 * u)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ScoreGradient, RejectsInvalidAction) {
  const SoftmaxPolicy policy = fixed_logits(0.0, 0.0);
  EXPECT_THROW(policy.score_gradient(unit_state, 2), ContractError);
  EXPECT_THROW(policy.action_probs(Vector::Ones(3)), ShapeError);
}

}  // namespace
}  // namespace evgrad
