#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evgrad/criteria.hpp"
#include "evgrad/envs.hpp"
#include "evgrad/estimators.hpp"
#include "evgrad/nn.hpp"
#include "evgrad/policy.hpp"

namespace evgrad {

enum class VarianceNormalization {
  biased_k,           // (1/K) sum ||g_k - mean||^2, the 1/K form of the EVv loss
  unbiased_k_minus_1  // (1/(K-1)) sum ||g_k - mean||^2
};

// Trace of the empirical covariance of the estimates. Needs >= 2 estimates.
double empirical_grad_variance(std::span<const GradEstimate> estimates, VarianceNormalization normalization);

struct VarianceReport {
  double v_evv = 0.0;       // baselined variance, 1/K normalization
  double v_unbiased = 0.0;  // baselined variance, 1/(K-1) normalization
  double v_mean_sq = 0.0;   // (1/K) sum ||g_k||^2 of the baselined estimates
  double baseline_off_variance = 0.0;  // 1/K normalization with b = 0 on the same pool
  double reduction_ratio = 1.0;
  std::size_t pool_size = 0;
  double c_hat_l = 0.0;  // empirical max ||grad log pi|| over the pool
  double c_hat_r = 0.0;  // empirical max |R_t| over the pool
  bool degenerate_pool = false;  // baseline-off estimates had no spread; ratio forced to 1
};

// Baseline-off variance at or below this fraction of the mean squared estimate
// marks the pool degenerate.
inline constexpr double degenerate_variance_fraction = 1e-12;

// Baselined versus zero-baseline estimator variance on one pool of trajectories.
// baseline == nullptr means b = 0, which yields a ratio of exactly 1.
VarianceReport reduction_ratio(std::vector<Trajectory> pool, const SoftmaxPolicy& policy, const Mlp* baseline,
                               double gamma);
VarianceReport reduction_ratio(const BatchContext& pool_ctx);

// Exact expectation of the baselined estimator over all trajectories of a chain
// MDP. With baseline == nullptr this is the exact policy gradient.
ParamVector exact_gradient_oracle(const EnvSpec& env, const SoftmaxPolicy& policy, const Mlp* baseline, double gamma);

// Exact Tr Cov of the baselined estimator on a chain MDP.
double exact_gradient_variance(const EnvSpec& env, const SoftmaxPolicy& policy, const Mlp* baseline, double gamma);

struct RewardStats {
  std::vector<double> mean;
  std::vector<double> std;               // sample standard deviation within the epoch
  std::vector<bool> single_sample;       // epoch had one episode; std reported as 0
};

// Per-epoch mean and sample std of episode rewards. window == 1 returns the raw
// series; larger windows apply a centered moving mean truncated at the edges.
RewardStats reward_stats(std::span<const std::vector<double>> episode_rewards, std::size_t window);

// Centered moving mean, truncated at the series edges.
std::vector<double> smooth(std::span<const double> series, std::size_t window);

}  // namespace evgrad
