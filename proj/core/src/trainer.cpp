#include "evgrad/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include "evgrad/errors.hpp"
#include "evgrad/random.hpp"

namespace evgrad {

std::string_view to_string(StepDecay d) { return d == StepDecay::constant ? "constant" : "inverse_time"; }

StepDecay parse_step_decay(std::string_view name) {
  if (name == "constant") return StepDecay::constant;
  if (name == "inverse_time") return StepDecay::inverse_time;
  throw ConfigError("unknown step decay '" + std::string(name) + "' (expected constant or inverse_time)");
}

std::string_view to_string(UpdateRule r) { return r == UpdateRule::sgd ? "sgd" : "adam"; }

UpdateRule parse_update_rule(std::string_view name) {
  if (name == "sgd") return UpdateRule::sgd;
  if (name == "adam") return UpdateRule::adam;
  throw ConfigError("unknown update rule '" + std::string(name) + "' (expected sgd or adam)");
}

double step_size(const StepSchedule& schedule, std::size_t n) {
  if (schedule.decay == StepDecay::constant) return schedule.initial;
  return schedule.initial / (1.0 + static_cast<double>(n) / schedule.half_life);
}

void TrainConfig::validate() const {
  env.validate();
  policy.validate();
  baseline.validate();
  if (policy.input_dim() != env.observation_dim())
    throw ConfigError("policy input dimension " + std::to_string(policy.input_dim()) + " must equal the " +
                      std::string(to_string(env.kind)) + " observation dimension " +
                      std::to_string(env.observation_dim()));
  if (policy.output_dim() != env.action_count())
    throw ConfigError("policy output dimension must equal the action count " + std::to_string(env.action_count()));
  if (baseline.input_dim() != env.observation_dim())
    throw ConfigError("baseline input dimension must equal the observation dimension");
  if (baseline.output_dim() != 1) throw ConfigError("baseline network must have a single output");
  if (batch_size < 1) throw ConfigError("batch size K must be >= 1");
  if (criterion == CriterionKind::evv && batch_size < 2)
    throw ConfigError("criterion evv requires batch size K >= 2: the variance cannot be estimated from one sample");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(alpha.initial > 0.0) || !(beta.initial > 0.0)) throw ConfigError("step sizes alpha and beta must be > 0");
  if (!(alpha.half_life > 0.0) || !(beta.half_life > 0.0)) throw ConfigError("step-size half lives must be > 0");
  if (probe_every < 1) throw ConfigError("probe_every must be >= 1");
  if (probe_pool < 2) throw ConfigError("probe_pool must be >= 2");
}

TrainState initial_state(const TrainConfig& cfg) {
  cfg.validate();
  TrainState s;
  s.seed = cfg.seed;
  s.theta = init_params(cfg.policy, derive_seed(cfg.seed, {static_cast<std::uint64_t>(StreamTag::policy_init),
                                                           cfg.policy_seed}))
                .params();
  s.phi = init_params(cfg.baseline, derive_seed(cfg.seed, {static_cast<std::uint64_t>(StreamTag::baseline_init),
                                                           cfg.baseline_seed}))
              .params();
  s.theta_moments = {ParamVector::Zero(s.theta.size()), ParamVector::Zero(s.theta.size())};
  s.phi_moments = {ParamVector::Zero(s.phi.size()), ParamVector::Zero(s.phi.size())};
  return s;
}

namespace {

constexpr double adam_beta1 = 0.9;
constexpr double adam_beta2 = 0.999;
constexpr double adam_eps = 1e-8;

// Returns the step direction for the given raw direction; step index is 1-based.
ParamVector update_direction(UpdateRule rule, const ParamVector& direction, AdamMoments& moments, std::size_t step) {
  if (rule == UpdateRule::sgd) return direction;
  moments.m = adam_beta1 * moments.m + (1.0 - adam_beta1) * direction;
  moments.v = adam_beta2 * moments.v + (1.0 - adam_beta2) * direction.cwiseAbs2();
  const double c1 = 1.0 - std::pow(adam_beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(adam_beta2, static_cast<double>(step));
  return (moments.m / c1).array() / ((moments.v / c2).array().sqrt() + adam_eps);
}

std::vector<Trajectory> sample_batch(const EnvSpec& env, const SoftmaxPolicy& policy, std::size_t count,
                                     std::uint64_t seed, StreamTag tag, std::size_t epoch) {
  std::vector<Trajectory> batch;
  batch.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream rng(seed, tag, epoch, i);
    batch.push_back(rollout(env, policy, rng));
  }
  return batch;
}

}  // namespace

std::pair<TrainState, EpochSummary> train_epoch(const TrainState& state, const TrainConfig& cfg) {
  const SoftmaxPolicy policy(Mlp(cfg.policy, state.theta));
  const Mlp baseline(cfg.baseline, state.phi);
  const Mlp* active_baseline = cfg.criterion == CriterionKind::none ? nullptr : &baseline;

  const BatchContext ctx(sample_batch(cfg.env, policy, cfg.batch_size, state.seed, StreamTag::rollout, state.epoch),
                         policy, active_baseline, cfg.gamma);

  EpochSummary summary;
  summary.epoch = state.epoch + 1;
  for (std::size_t k = 0; k < ctx.size(); ++k) {
    const auto& traj = ctx.terms(k).trajectory;
    summary.episode_rewards.push_back(traj.total_reward());
    summary.steps += traj.size();
  }
  const auto stats = reward_stats(std::span<const std::vector<double>>(&summary.episode_rewards, 1), 1);
  summary.mean_reward = stats.mean.front();
  summary.std_reward = stats.std.front();
  summary.a2c_loss = a2c_loss(ctx);
  summary.evm_loss = evm_loss(ctx);
  if (ctx.size() >= 2) summary.evv_loss = evv_loss(ctx);

  TrainState next = state;
  next.epoch = state.epoch + 1;
  const double alpha = step_size(cfg.alpha, state.epoch);
  const double beta = step_size(cfg.beta, state.epoch);

  // Both directions are evaluated at (theta_n, phi_n) before either moves.
  const ParamVector policy_direction = ctx.mean_gradient();
  std::optional<ParamVector> baseline_grad;
  if (cfg.criterion != CriterionKind::none) baseline_grad = loss_and_grad(cfg.criterion, ctx, baseline).grad;

  next.theta += alpha * update_direction(cfg.update, policy_direction, next.theta_moments, next.epoch);
  if (baseline_grad) next.phi -= beta * update_direction(cfg.update, *baseline_grad, next.phi_moments, next.epoch);

  if (!next.theta.allFinite() || !next.phi.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite parameters after epoch " << next.epoch << " (seed " << state.seed
        << "): |grad theta| = " << policy_direction.norm()
        << ", |grad phi| = " << (baseline_grad ? baseline_grad->norm() : 0.0) << ", |theta| = " << state.theta.norm()
        << ", |phi| = " << state.phi.norm() << ", alpha = " << alpha << ", beta = " << beta;
    throw TrainingAbort(msg.str());
  }
  return {std::move(next), std::move(summary)};
}

VarianceReport probe_state(const TrainState& state, const TrainConfig& cfg) {
  const SoftmaxPolicy policy(Mlp(cfg.policy, state.theta));
  const Mlp baseline(cfg.baseline, state.phi);
  const Mlp* active_baseline = cfg.criterion == CriterionKind::none ? nullptr : &baseline;
  return reduction_ratio(sample_batch(cfg.env, policy, cfg.probe_pool, state.seed, StreamTag::probe, state.epoch),
                         policy, active_baseline, cfg.gamma);
}

TrainState run_experiment(const TrainConfig& cfg, MetricsSink& sink) {
  TrainState state = initial_state(cfg);
  for (std::size_t n = 0; n < cfg.epochs; ++n) {
    const auto start = std::chrono::steady_clock::now();
    auto [next, summary] = train_epoch(state, cfg);
    state = std::move(next);

    MetricsRecord rec;
    rec.run_seed = cfg.seed;
    rec.epoch = summary.epoch;
    rec.mean_reward = summary.mean_reward;
    rec.std_reward = summary.std_reward;
    rec.a2c_loss = summary.a2c_loss;
    rec.evm_loss = summary.evm_loss;
    rec.evv_loss = summary.evv_loss;
    if (state.epoch % cfg.probe_every == 0) {
      const VarianceReport r = probe_state(state, cfg);
      rec.grad_var_biased = r.v_evv;
      rec.grad_var_unbiased = r.v_unbiased;
      rec.grad_var_no_baseline = r.baseline_off_variance;
      rec.reduction_ratio = r.reduction_ratio;
      rec.c_hat_l = r.c_hat_l;
      rec.c_hat_r = r.c_hat_r;
    }
    if (cfg.record_wall_time)
      rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                        .count();
    sink.append(rec);
  }
  return state;
}

}  // namespace evgrad
