#include "evgrad/probes.hpp"

#include <algorithm>
#include <cmath>

#include "evgrad/errors.hpp"

namespace evgrad {

double empirical_grad_variance(std::span<const GradEstimate> estimates, VarianceNormalization normalization) {
  if (estimates.size() < 2) throw ContractError("gradient variance needs at least two estimates");
  const double k = static_cast<double>(estimates.size());
  ParamVector mean = estimates.front().g;
  for (std::size_t i = 1; i < estimates.size(); ++i) mean += estimates[i].g;
  mean /= k;
  // Centered sum of squares; the expanded second-moment form cancels badly when
  // the spread is small next to the mean.
  double centered = 0.0;
  for (const auto& e : estimates) centered += (e.g - mean).squaredNorm();
  return normalization == VarianceNormalization::biased_k ? centered / k : centered / (k - 1.0);
}

VarianceReport reduction_ratio(std::vector<Trajectory> pool, const SoftmaxPolicy& policy, const Mlp* baseline,
                               double gamma) {
  if (pool.size() < 2) throw ContractError("probe pool needs at least two trajectories");
  return reduction_ratio(BatchContext(std::move(pool), policy, baseline, gamma));
}

VarianceReport reduction_ratio(const BatchContext& ctx) {
  if (ctx.size() < 2) throw ContractError("probe pool needs at least two trajectories");
  VarianceReport r;
  r.pool_size = ctx.size();
  const auto on = ctx.estimates();
  r.v_evv = empirical_grad_variance(on, VarianceNormalization::biased_k);
  r.v_unbiased = empirical_grad_variance(on, VarianceNormalization::unbiased_k_minus_1);
  r.v_mean_sq = evm_loss(ctx);
  const auto off = ctx.zero_baseline_estimates();
  r.baseline_off_variance = empirical_grad_variance(off, VarianceNormalization::biased_k);
  double off_mean_sq = 0.0;
  for (const auto& e : off) off_mean_sq += e.g.squaredNorm() / static_cast<double>(off.size());
  // Identical estimates leave only rounding noise in the denominator.
  if (r.baseline_off_variance > degenerate_variance_fraction * off_mean_sq) {
    r.reduction_ratio = r.v_evv / r.baseline_off_variance;
  } else {
    r.reduction_ratio = 1.0;
    r.degenerate_pool = true;
  }
  r.c_hat_l = ctx.max_score_norm();
  r.c_hat_r = ctx.max_abs_reward();
  return r;
}

namespace {

template <typename Fn>
void for_each_estimate(const EnvSpec& env, const SoftmaxPolicy& policy, const Mlp* baseline, double gamma, Fn fn) {
  for (const auto& [traj, prob] : enumerate_trajectories(env, policy)) {
    const auto returns = discounted_returns(traj.rewards(), gamma);
    const auto values = baseline ? baseline_values(*baseline, traj) : std::vector<double>(traj.size(), 0.0);
    const ScoreCache cache = build_score_cache(traj, policy, gamma);
    fn(prob, baselined_gradient(traj, cache, returns, values).g);
  }
}

}  // namespace

ParamVector exact_gradient_oracle(const EnvSpec& env, const SoftmaxPolicy& policy, const Mlp* baseline,
                                  double gamma) {
  ParamVector expectation = ParamVector::Zero(static_cast<Eigen::Index>(policy.net().param_count()));
  for_each_estimate(env, policy, baseline, gamma,
                    [&](double prob, const ParamVector& g) { expectation += prob * g; });
  return expectation;
}

double exact_gradient_variance(const EnvSpec& env, const SoftmaxPolicy& policy, const Mlp* baseline, double gamma) {
  ParamVector mean = ParamVector::Zero(static_cast<Eigen::Index>(policy.net().param_count()));
  double second_moment = 0.0;
  for_each_estimate(env, policy, baseline, gamma, [&](double prob, const ParamVector& g) {
    mean += prob * g;
    second_moment += prob * g.squaredNorm();
  });
  return second_moment - mean.squaredNorm();
}

std::vector<double> smooth(std::span<const double> series, std::size_t window) {
  if (window < 1) throw ContractError("smoothing window must be >= 1");
  const std::size_t n = series.size();
  const std::size_t before = (window - 1) / 2;
  const std::size_t after = window / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(n - 1, i + after);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

RewardStats reward_stats(std::span<const std::vector<double>> episode_rewards, std::size_t window) {
  if (window < 1) throw ContractError("smoothing window must be >= 1");
  RewardStats s;
  for (const auto& rewards : episode_rewards) {
    if (rewards.empty()) throw ContractError("epoch without episodes");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double ss = 0.0;
    for (double r : rewards) ss += (r - mean) * (r - mean);
    s.mean.push_back(mean);
    s.single_sample.push_back(rewards.size() == 1);
    s.std.push_back(rewards.size() == 1 ? 0.0 : std::sqrt(ss / (n - 1.0)));
  }
  if (window > 1) {
    s.mean = smooth(s.mean, window);
    s.std = smooth(s.std, window);
  }
  return s;
}

}  // namespace evgrad
