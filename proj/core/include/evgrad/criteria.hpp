#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "evgrad/envs.hpp"
#include "evgrad/estimators.hpp"
#include "evgrad/nn.hpp"
#include "evgrad/policy.hpp"

namespace evgrad {

// Objective used to fit the baseline.
//   a2c  least squares of the returns
//   evm  mean squared norm of the gradient estimates
//   evv  empirical variance of the gradient estimates (needs K >= 2)
//   none baseline stays untouched
enum class CriterionKind { none, a2c, evm, evv };

std::string_view to_string(CriterionKind kind);
CriterionKind parse_criterion(std::string_view name);

// How score vectors are reached when the criteria need dot products g . u_t.
//   cached    every u_t is stored (memory T * D per trajectory)
//   streamed  u_t is never formed; g . u_t comes from a forward-mode sweep
//   automatic cached when the batch fits in score_cache_budget doubles
enum class ScoreMode { cached, streamed, automatic };

inline constexpr std::size_t score_cache_budget = 500'000;

struct TrajectoryTerms {
  Trajectory trajectory;
  std::vector<double> returns;
  std::vector<double> baseline_values;
  std::vector<double> gamma_weights;
  std::optional<ScoreCache> scores;
};

// Everything the criteria need about one batch of K trajectories: returns,
// baseline values, estimates g_k and their sum.
class BatchContext {
 public:
  // baseline == nullptr means b = 0 (plain REINFORCE).
  BatchContext(std::vector<Trajectory> batch, const SoftmaxPolicy& policy, const Mlp* baseline, double gamma,
               ScoreMode mode = ScoreMode::automatic);

  std::size_t size() const { return terms_.size(); }
  double gamma() const { return gamma_; }
  const SoftmaxPolicy& policy() const { return policy_; }
  bool cached() const { return cached_; }

  const TrajectoryTerms& terms(std::size_t k) const { return terms_[k]; }
  std::span<const GradEstimate> estimates() const { return estimates_; }
  const ParamVector& gradient_sum() const { return gradient_sum_; }
  ParamVector mean_gradient() const { return gradient_sum_ / static_cast<double>(size()); }

  // (u_t . direction) for every step of trajectory k.
  std::vector<double> score_dots(std::size_t k, const ParamVector& direction) const;

  // Estimates recomputed for other baseline values on the same trajectories and scores.
  std::vector<GradEstimate> estimates_for(std::span<const std::vector<double>> values) const;
  std::vector<GradEstimate> zero_baseline_estimates() const;

  // Same trajectories and scores, new baseline (nullptr = zero).
  BatchContext rebaselined(const Mlp* baseline) const;

  // max over (k, t) of ||u_t^k||_2.
  double max_score_norm() const;
  std::size_t max_length() const;
  double max_abs_reward() const;

 private:
  void assign_baseline(const Mlp* baseline);

  SoftmaxPolicy policy_;
  double gamma_ = 1.0;
  bool cached_ = false;
  std::vector<TrajectoryTerms> terms_;
  std::vector<GradEstimate> estimates_;
  ParamVector gradient_sum_;
};

struct CriterionValue {
  double loss = 0.0;
  ParamVector grad;  // gradient of loss with respect to the baseline params
};

// (1/K) sum_k sum_t (G_t^k - b(S_t^k))^2.
CriterionValue a2c_loss_and_grad(const BatchContext& ctx, const Mlp& baseline);
// (1/K) sum_k ||g_k||^2.
CriterionValue evm_loss_and_grad(const BatchContext& ctx, const Mlp& baseline);
// (1/K) sum_k ||g_k||^2 - (1/K^2) ||sum_k g_k||^2. Throws ConfigError when K < 2.
CriterionValue evv_loss_and_grad(const BatchContext& ctx, const Mlp& baseline);

CriterionValue loss_and_grad(CriterionKind kind, const BatchContext& ctx, const Mlp& baseline);

double a2c_loss(const BatchContext& ctx);
double evm_loss(const BatchContext& ctx);
double evv_loss(const BatchContext& ctx);

struct InequalityReport {
  double v_evv = 0.0;
  double v_evm = 0.0;
  double v_a2c = 0.0;
  double c_hat_l = 0.0;  // empirical max score norm
  double s_gamma = 0.0;  // sum_{t < T_max} gamma^t
  std::size_t batch_size = 0;
  std::size_t max_length = 0;
  bool jensen_holds = false;          // v_evv <= v_evm + slack
  bool cauchy_schwarz_holds = false;  // v_evm <= c_hat_l^2 * s_gamma * v_a2c + slack
  bool two_cl_squared_holds = false;  // v_evm <= 2 c_hat_l^2 v_a2c, logged only

  bool ok() const { return jensen_holds && cauchy_schwarz_holds; }
};

inline constexpr double inequality_slack = 1e-9;

InequalityReport criterion_inequality_report(const BatchContext& ctx);

std::ostream& operator<<(std::ostream& os, const InequalityReport& r);

}  // namespace evgrad
