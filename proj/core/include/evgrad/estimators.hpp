#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evgrad/envs.hpp"
#include "evgrad/nn.hpp"
#include "evgrad/policy.hpp"

namespace evgrad {

// One per-trajectory policy-gradient estimate g_k.
struct GradEstimate {
  ParamVector g;
  std::size_t trajectory_index = 0;
};

// Per-timestep score vectors u_t = grad_theta log pi(A_t|S_t) and discount weights gamma^t.
struct ScoreCache {
  std::vector<ParamVector> u;
  std::vector<double> gamma_weights;
};

// G_t = R_t + gamma * G_{t+1}, evaluated backwards. gamma in [0, 1].
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

std::vector<double> discount_weights(std::size_t length, double gamma);

ScoreCache build_score_cache(const Trajectory& traj, const SoftmaxPolicy& policy, double gamma);

// b(S_t) for every visited state; the baseline net has one output.
std::vector<double> baseline_values(const Mlp& baseline, const Trajectory& traj);

// g = sum_t gamma^t (G_t - b_t) u_t from cached scores. Zero baseline values give REINFORCE.
GradEstimate baselined_gradient(const Trajectory& traj, const ScoreCache& cache, std::span<const double> returns,
                                std::span<const double> baseline_values, std::size_t trajectory_index = 0);

// Same estimate, accumulated through one backward pass per step without storing u_t.
GradEstimate baselined_gradient(const Trajectory& traj, const SoftmaxPolicy& policy, double gamma,
                                std::span<const double> returns, std::span<const double> baseline_values,
                                std::size_t trajectory_index = 0);

ParamVector batch_mean_gradient(std::span<const GradEstimate> estimates);

}  // namespace evgrad
