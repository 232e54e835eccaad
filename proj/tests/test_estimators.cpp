#include <gtest/gtest.h>

#include <cmath>

#include "evgrad/envs.hpp"
#include "evgrad/errors.hpp"
#include "evgrad/estimators.hpp"
#include "evgrad/probes.hpp"
#include "support.hpp"

namespace evgrad {
namespace {

using testing::random_net;

std::vector<double> returns_of(std::vector<double> rewards, double gamma) { return discounted_returns(rewards, gamma); }

TEST(DiscountedReturns, Examples) {
  EXPECT_EQ(returns_of({1, 1, 1}, 0.5), (std::vector<double>{1.75, 1.5, 1.0}));
  EXPECT_EQ(returns_of({1, 1}, 1.0), (std::vector<double>{2, 1}));
  EXPECT_EQ(returns_of({0.3, -2, 7}, 0.0), (std::vector<double>{0.3, -2, 7}));
  EXPECT_THROW(returns_of({}, 0.9), ContractError);
  EXPECT_THROW(returns_of({1}, 1.5), ContractError);
}

TEST(DiscountedReturns, MatchesForwardSum) {
  RandomStream rng(1);
  std::vector<double> r(40);
  for (auto& v : r) v = rng.uniform(-1, 1);
  const double gamma = 0.93;
  const auto g = discounted_returns(r, gamma);
  for (std::size_t t = 0; t < r.size(); ++t) {
    double sum = 0.0, w = 1.0;
    for (std::size_t s = t; s < r.size(); ++s, w *= gamma) sum += w * r[s];
    EXPECT_NEAR(g[t], sum, 1e-12);
  }
}

Trajectory sample_trajectory(std::uint64_t seed, const SoftmaxPolicy& policy, const EnvSpec& env) {
  RandomStream rng(seed);
  return rollout(env, policy, rng);
}

TEST(BaselinedGradient, PerfectBaselineCancels) {
  RandomStream rng(2);
  const SoftmaxPolicy policy(random_net(rng, {4, 6, 2}, Activation::tanh));
  const Trajectory t = sample_trajectory(3, policy, make_cartpole(50));
  const auto g = discounted_returns(t.rewards(), 0.9);
  const ScoreCache cache = build_score_cache(t, policy, 0.9);
  EXPECT_TRUE(baselined_gradient(t, cache, g, g).g.isZero(0.0));
}

TEST(BaselinedGradient, SingleTermAndZeroBaselineIsReinforce) {
  // T = 1 bandit pull: g = (G - b) u.
  const SoftmaxPolicy policy(Mlp(MlpShape{{1, 2}, Activation::tanh}, ParamVector::Zero(4)));
  const Trajectory t{{{Vector::Ones(1), 0, 1.0}}, true};
  const ScoreCache cache = build_score_cache(t, policy, 0.5);
  const std::vector<double> g{1.0}, b{0.0};
  EXPECT_EQ(baselined_gradient(t, cache, g, b).g, cache.u[0]);
}

// Direct evaluation of sum_t gamma^t G_t grad log pi(A_t|S_t) with no shared machinery.
ParamVector reinforce_reference(const Trajectory& t, const SoftmaxPolicy& policy, double gamma) {
  ParamVector g = ParamVector::Zero(static_cast<Eigen::Index>(policy.net().param_count()));
  double w = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i, w *= gamma) {
    double ret = 0.0, v = 1.0;
    for (std::size_t s = i; s < t.size(); ++s, v *= gamma) ret += v * t.transitions[s].reward;
    g += w * ret * policy.score_gradient(t.transitions[i].state, t.transitions[i].action);
  }
  return g;
}

TEST(BaselinedGradient, ZeroBaselineMatchesDirectReinforce) {
  RandomStream rng(4);
  for (int i = 0; i < 10; ++i) {
    const SoftmaxPolicy policy(random_net(rng, {4, 5, 2}, Activation::mish));
    const Trajectory t = sample_trajectory(rng.next_u64(), policy, make_cartpole(60));
    const double gamma = 0.97;
    const auto ret = discounted_returns(t.rewards(), gamma);
    const std::vector<double> zero(t.size(), 0.0);
    const ParamVector cached = baselined_gradient(t, build_score_cache(t, policy, gamma), ret, zero).g;
    const ParamVector streamed = baselined_gradient(t, policy, gamma, ret, zero).g;
    const ParamVector ref = reinforce_reference(t, policy, gamma);
    EXPECT_LT(relative_error(cached, ref), 1e-12);
    EXPECT_LT(relative_error(streamed, ref), 1e-12);
  }
}

TEST(BaselinedGradient, CachedAndStreamedAgree) {
  RandomStream rng(5);
  const SoftmaxPolicy policy(random_net(rng, {4, 8, 2}, Activation::mish));
  const Mlp baseline = random_net(rng, {4, 6, 1}, Activation::tanh);
  const Trajectory t = sample_trajectory(6, policy, make_cartpole(80));
  const auto ret = discounted_returns(t.rewards(), 0.99);
  const auto b = baseline_values(baseline, t);
  const ParamVector cached = baselined_gradient(t, build_score_cache(t, policy, 0.99), ret, b).g;
  const ParamVector streamed = baselined_gradient(t, policy, 0.99, ret, b).g;
  EXPECT_LT((cached - streamed).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + cached.cwiseAbs().maxCoeff()));
}

TEST(BaselinedGradient, LengthMismatchThrows) {
  RandomStream rng(7);
  const SoftmaxPolicy policy(random_net(rng, {4, 2}, Activation::tanh));
  const Trajectory t = sample_trajectory(8, policy, make_cartpole(10));
  const auto ret = discounted_returns(t.rewards(), 0.9);
  const std::vector<double> short_b(t.size() + 1, 0.0);
  EXPECT_THROW(baselined_gradient(t, policy, 0.9, ret, short_b), ContractError);
}

TEST(BatchMean, Examples) {
  const ParamVector v = (ParamVector(2) << 1.0, 0.0).finished();
  const std::vector<GradEstimate> one{{v, 0}};
  EXPECT_EQ(batch_mean_gradient(one), v);
  const std::vector<GradEstimate> pair{{v, 0}, {-v, 1}};
  EXPECT_TRUE(batch_mean_gradient(pair).isZero(0.0));
  const ParamVector w = (ParamVector(2) << 0.1, -0.7).finished();
  const std::vector<GradEstimate> copies(7, GradEstimate{w, 0});
  EXPECT_LT((batch_mean_gradient(copies) - w).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(batch_mean_gradient(std::vector<GradEstimate>{}), ContractError);
}

TEST(Unbiasedness, BanditEnumerationEqualsSoftmaxGradient) {
  const SoftmaxPolicy policy(Mlp(MlpShape{{1, 2}, Activation::tanh}, ParamVector::Zero(4)));
  const ParamVector g = exact_gradient_oracle(make_bandit({1.0, 0.0}), policy, nullptr, 1.0);
  EXPECT_NEAR(g[0], 0.25, 1e-12);
  EXPECT_NEAR(g[1], -0.25, 1e-12);
}

TEST(Unbiasedness, StateBaselineTermVanishesExactly) {
  RandomStream rng(9);
  for (int i = 0; i < 50; ++i) {
    const EnvSpec env = make_test_chain(4);
    const SoftmaxPolicy policy(random_net(rng, {4, 3, 2}, Activation::tanh, 1.5));
    const Mlp baseline = random_net(rng, {4, 1}, Activation::tanh, 3.0);
    const double gamma = rng.uniform(0.5, 1.0);
    const ParamVector with = exact_gradient_oracle(env, policy, &baseline, gamma);
    const ParamVector without = exact_gradient_oracle(env, policy, nullptr, gamma);
    EXPECT_LT((with - without).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Unbiasedness, BaselineTermHasZeroMonteCarloMeanOnCartPole) {
  RandomStream rng(10);
  const SoftmaxPolicy policy(random_net(rng, {4, 8, 2}, Activation::tanh, 0.5));
  const Mlp baseline = random_net(rng, {4, 8, 1}, Activation::tanh, 1.0);
  const double gamma = 0.99;
  std::vector<Eigen::Index> coords;
  for (int i = 0; i < 10; ++i)
    coords.push_back(static_cast<Eigen::Index>(rng.next_u64() % policy.net().param_count()));

  const int n = 100'000;
  std::vector<double> sum(coords.size(), 0.0), sum_sq(coords.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const Trajectory t = rollout(make_cartpole(), policy, rng);
    // Zero returns leave -sum_t gamma^t b(S_t) u_t.
    const std::vector<double> zero(t.size(), 0.0);
    const ParamVector term = baselined_gradient(t, policy, gamma, zero, baseline_values(baseline, t)).g;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      sum[c] += term[coords[c]];
      sum_sq[c] += term[coords[c]] * term[coords[c]];
    }
  }
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const double mean = sum[c] / n;
    const double se = std::sqrt((sum_sq[c] / n - mean * mean) / (n - 1));
    EXPECT_LE(std::abs(mean), 4.0 * se) << "coordinate " << coords[c];
  }
}

}  // namespace
}  // namespace evgrad
