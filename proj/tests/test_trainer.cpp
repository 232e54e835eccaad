#include <gtest/gtest.h>

#include <numeric>

#include "evgrad/errors.hpp"
#include "evgrad/trainer.hpp"
#include "support.hpp"

namespace evgrad {
namespace {

// Small CartPole setup that trains in milliseconds per epoch.
TrainConfig small_config() {
  TrainConfig cfg;
  cfg.env = make_cartpole(60);
  cfg.policy = {{4, 8, 2}, Activation::tanh};
  cfg.baseline = {{4, 8, 1}, Activation::tanh};
  cfg.batch_size = 4;
  cfg.epochs = 6;
  cfg.probe_every = 2;
  cfg.probe_pool = 6;
  cfg.seed = 3;
  return cfg;
}

TEST(StepSize, Examples) {
  EXPECT_EQ(step_size({0.01, StepDecay::constant, 1.0}, 0), 0.01);
  EXPECT_EQ(step_size({0.01, StepDecay::constant, 1.0}, 12345), 0.01);
  EXPECT_EQ(step_size({1.0, StepDecay::inverse_time, 1.0}, 1), 0.5);
  const StepSchedule s{0.3, StepDecay::inverse_time, 7.0};
  for (std::size_t n = 0; n < 100; ++n) EXPECT_LE(step_size(s, n + 1), step_size(s, n));
}

TEST(Validate, NamesTheViolatedConstraint) {
  TrainConfig cfg = small_config();
  cfg.criterion = CriterionKind::evv;
  cfg.batch_size = 1;
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("K >= 2"), std::string::npos) << e.what();
  }
  cfg = small_config();
  cfg.gamma = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.policy = {{3, 2}, Activation::tanh};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.alpha.initial = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(InitialState, DependsOnMasterSeed) {
  TrainConfig a = small_config(), b = small_config();
  b.seed = 4;
  EXPECT_EQ(initial_state(a).theta, initial_state(a).theta);
  EXPECT_NE(initial_state(a).theta, initial_state(b).theta);
  EXPECT_NE(initial_state(a).phi, initial_state(b).phi);
}

TEST(TrainEpoch, ZeroStepsOnlyAdvanceTheCounter) {
  for (UpdateRule rule : {UpdateRule::sgd, UpdateRule::adam}) {
    TrainConfig cfg = small_config();
    const TrainState s0 = initial_state(cfg);
    cfg.update = rule;
    cfg.alpha.initial = 0.0;
    cfg.beta.initial = 0.0;
    const auto [s1, summary] = train_epoch(s0, cfg);
    EXPECT_EQ(s1.theta, s0.theta);
    EXPECT_EQ(s1.phi, s0.phi);
    EXPECT_EQ(s1.epoch, 1u);
    EXPECT_EQ(summary.epoch, 1u);
    EXPECT_EQ(summary.episode_rewards.size(), cfg.batch_size);
  }
}

TEST(TrainEpoch, NoCriterionIsPlainReinforce) {
  TrainConfig cfg = small_config();
  cfg.criterion = CriterionKind::none;
  cfg.update = UpdateRule::sgd;
  cfg.alpha = {0.05, StepDecay::constant, 1.0};
  TrainState state = initial_state(cfg);
  ParamVector theta = state.theta;
  for (std::size_t epoch = 0; epoch < 5; ++epoch) {
    const SoftmaxPolicy policy(Mlp(cfg.policy, theta));
    ParamVector sum = ParamVector::Zero(theta.size());
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      RandomStream rng(cfg.seed, StreamTag::rollout, epoch, i);
      const Trajectory t = rollout(cfg.env, policy, rng);
      double w = 1.0;
      for (std::size_t s = 0; s < t.size(); ++s, w *= cfg.gamma) {
        double ret = 0.0, v = 1.0;
        for (std::size_t r = s; r < t.size(); ++r, v *= cfg.gamma) ret += v * t.transitions[r].reward;
        sum += w * ret * policy.score_gradient(t.transitions[s].state, t.transitions[s].action);
      }
    }
    theta += 0.05 * sum / static_cast<double>(cfg.batch_size);
    state = train_epoch(state, cfg).first;
    EXPECT_LT((state.theta - theta).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + theta.cwiseAbs().maxCoeff()));
    EXPECT_EQ(state.phi, initial_state(cfg).phi);
  }
}

TEST(TrainEpoch, FixedPolicyA2cRegressionLossFalls) {
  TrainConfig cfg = small_config();
  cfg.env = make_cartpole(200);
  cfg.criterion = CriterionKind::a2c;
  cfg.batch_size = 8;
  cfg.beta = {1e-2, StepDecay::constant, 1.0};
  TrainState state = initial_state(cfg);
  cfg.alpha.initial = 0.0;
  std::vector<double> losses;
  for (int epoch = 0; epoch < 500; ++epoch) {
    auto [next, summary] = train_epoch(state, cfg);
    losses.push_back(summary.a2c_loss);
    state = std::move(next);
  }
  const double first = std::accumulate(losses.begin(), losses.begin() + 20, 0.0);
  const double last = std::accumulate(losses.end() - 20, losses.end(), 0.0);
  EXPECT_LT(last, first);
}

TEST(TrainEpoch, NonFiniteParametersAbort) {
  TrainConfig cfg = small_config();
  cfg.update = UpdateRule::sgd;
  cfg.criterion = CriterionKind::a2c;
  cfg.beta.initial = 1e308;
  EXPECT_THROW(train_epoch(initial_state(cfg), cfg), TrainingAbort);
}

TEST(RunExperiment, ZeroEpochsReturnsInitialState) {
  TrainConfig cfg = small_config();
  cfg.epochs = 0;
  MemorySink sink;
  const TrainState s = run_experiment(cfg, sink);
  EXPECT_TRUE(sink.records.empty());
  EXPECT_EQ(s.theta, initial_state(cfg).theta);
  EXPECT_EQ(s.epoch, 0u);
}

TEST(RunExperiment, RecordsProbesOnSchedule) {
  for (CriterionKind kind : {CriterionKind::a2c, CriterionKind::evm, CriterionKind::evv}) {
    TrainConfig cfg = small_config();
    cfg.criterion = kind;
    MemorySink sink;
    run_experiment(cfg, sink);
    ASSERT_EQ(sink.records.size(), 6u);
    for (const auto& r : sink.records) {
      EXPECT_EQ(r.run_seed, cfg.seed);
      EXPECT_TRUE(r.a2c_loss && r.evm_loss && r.evv_loss);
      EXPECT_FALSE(r.wall_ms);
      const bool probe = r.epoch % 2 == 0;
      EXPECT_EQ(r.reduction_ratio.has_value(), probe) << r.epoch;
      if (!probe) continue;
      const double k = static_cast<double>(cfg.probe_pool);
      EXPECT_LE(std::abs(*r.grad_var_unbiased - *r.grad_var_biased * k / (k - 1.0)), 1e-12 * *r.grad_var_unbiased);
      EXPECT_GT(*r.reduction_ratio, 0.0);
      EXPECT_GT(*r.c_hat_l, 0.0);
      EXPECT_EQ(*r.c_hat_r, 1.0);
    }
    for (std::size_t i = 0; i < sink.records.size(); ++i) EXPECT_EQ(sink.records[i].epoch, i + 1);
  }
}

TEST(RunExperiment, Deterministic) {
  TrainConfig cfg = small_config();
  MemorySink a, b;
  const TrainState sa = run_experiment(cfg, a);
  const TrainState sb = run_experiment(cfg, b);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(sa.theta, sb.theta);
  EXPECT_EQ(sa.phi, sb.phi);
}

TEST(RunExperiment, WallTimeOnlyWhenRequested) {
  TrainConfig cfg = small_config();
  cfg.epochs = 2;
  cfg.record_wall_time = true;
  MemorySink sink;
  run_experiment(cfg, sink);
  for (const auto& r : sink.records) EXPECT_TRUE(r.wall_ms.has_value());
}

TEST(UpdateRule, ParseRoundTrip) {
  for (UpdateRule r : {UpdateRule::sgd, UpdateRule::adam}) EXPECT_EQ(parse_update_rule(to_string(r)), r);
  for (StepDecay d : {StepDecay::constant, StepDecay::inverse_time}) EXPECT_EQ(parse_step_decay(to_string(d)), d);
  EXPECT_THROW(parse_update_rule("rmsprop"), ConfigError);
}

}  // namespace
}  // namespace evgrad
