#include "evgrad/estimators.hpp"

#include <cmath>
#include <string>

#include "evgrad/errors.hpp"

namespace evgrad {

namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractError("discount factor must lie in [0, 1]");
}

void check_lengths(const Trajectory& traj, std::size_t returns, std::size_t baseline) {
  if (returns != traj.size() || baseline != traj.size())
    throw ContractError("returns (" + std::to_string(returns) + ") and baseline values (" + std::to_string(baseline) +
                        ") must match trajectory length " + std::to_string(traj.size()));
}

}  // namespace

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw ContractError("discounted returns of an empty reward list");
  check_gamma(gamma);
  std::vector<double> g(rewards.size());
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    g[t] = running;
  }
  return g;
}

std::vector<double> discount_weights(std::size_t length, double gamma) {
  check_gamma(gamma);
  std::vector<double> w(length);
  double p = 1.0;
  for (std::size_t t = 0; t < length; ++t) {
    w[t] = p;
    p *= gamma;
  }
  return w;
}

ScoreCache build_score_cache(const Trajectory& traj, const SoftmaxPolicy& policy, double gamma) {
  ScoreCache cache;
  cache.gamma_weights = discount_weights(traj.size(), gamma);
  cache.u.reserve(traj.size());
  for (const auto& tr : traj.transitions) cache.u.push_back(policy.score_gradient(tr.state, tr.action));
  return cache;
}

std::vector<double> baseline_values(const Mlp& baseline, const Trajectory& traj) {
  if (baseline.shape().output_dim() != 1) throw ShapeError("baseline network must have a single output");
  std::vector<double> b;
  b.reserve(traj.size());
  for (const auto& tr : traj.transitions) b.push_back(baseline.forward(tr.state)[0]);
  return b;
}

GradEstimate baselined_gradient(const Trajectory& traj, const ScoreCache& cache, std::span<const double> returns,
                                std::span<const double> baseline_values, std::size_t trajectory_index) {
  check_lengths(traj, returns.size(), baseline_values.size());
  if (cache.u.size() != traj.size() || cache.gamma_weights.size() != traj.size())
    throw ContractError("score cache does not match trajectory length");
  if (cache.u.empty()) throw ContractError("empty trajectory");
  ParamVector g = ParamVector::Zero(cache.u.front().size());
  for (std::size_t t = 0; t < traj.size(); ++t)
    g += (cache.gamma_weights[t] * (returns[t] - baseline_values[t])) * cache.u[t];
  return {std::move(g), trajectory_index};
}

GradEstimate baselined_gradient(const Trajectory& traj, const SoftmaxPolicy& policy, double gamma,
                                std::span<const double> returns, std::span<const double> baseline_values,
                                std::size_t trajectory_index) {
  check_lengths(traj, returns.size(), baseline_values.size());
  const auto weights = discount_weights(traj.size(), gamma);
  ParamVector g = ParamVector::Zero(static_cast<Eigen::Index>(policy.net().param_count()));
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const double scale = weights[t] * (returns[t] - baseline_values[t]);
    if (scale == 0.0) continue;
    policy.accumulate_score(traj.transitions[t].state, traj.transitions[t].action, scale, g);
  }
  return {std::move(g), trajectory_index};
}

ParamVector batch_mean_gradient(std::span<const GradEstimate> estimates) {
  if (estimates.empty()) throw ContractError("batch mean of an empty estimate list");
  ParamVector sum = estimates.front().g;
  for (std::size_t k = 1; k < estimates.size(); ++k) {
    if (estimates[k].g.size() != sum.size()) throw ContractError("gradient estimates differ in length");
    sum += estimates[k].g;
  }
  return sum / static_cast<double>(estimates.size());
}

}  // namespace evgrad
