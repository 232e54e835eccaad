#include "evgrad/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "evgrad/errors.hpp"

namespace evgrad {

std::string_view to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::none:
      return "none";
    case CriterionKind::a2c:
      return "a2c";
    case CriterionKind::evm:
      return "evm";
    case CriterionKind::evv:
      return "evv";
  }
  return "?";
}

CriterionKind parse_criterion(std::string_view name) {
  if (name == "none") return CriterionKind::none;
  if (name == "a2c") return CriterionKind::a2c;
  if (name == "evm") return CriterionKind::evm;
  if (name == "evv") return CriterionKind::evv;
  throw ConfigError("unknown criterion '" + std::string(name) + "' (expected none, a2c, evm or evv)");
}

BatchContext::BatchContext(std::vector<Trajectory> batch, const SoftmaxPolicy& policy, const Mlp* baseline,
                           double gamma, ScoreMode mode)
    : policy_(policy), gamma_(gamma) {
  if (batch.empty()) throw ContractError("batch context needs at least one trajectory");
  std::size_t steps = 0;
  for (const auto& t : batch) {
    if (t.size() == 0) throw ContractError("batch contains an empty trajectory");
    steps += t.size();
  }
  cached_ = mode == ScoreMode::cached ||
            (mode == ScoreMode::automatic && steps * policy.net().param_count() <= score_cache_budget);

  terms_.reserve(batch.size());
  for (auto& traj : batch) {
    TrajectoryTerms terms;
    terms.returns = discounted_returns(traj.rewards(), gamma);
    terms.gamma_weights = discount_weights(traj.size(), gamma);
    if (cached_) terms.scores = build_score_cache(traj, policy_, gamma);
    terms.trajectory = std::move(traj);
    terms_.push_back(std::move(terms));
  }
  assign_baseline(baseline);
}

void BatchContext::assign_baseline(const Mlp* baseline) {
  std::vector<std::vector<double>> values;
  values.reserve(terms_.size());
  for (const auto& terms : terms_)
    values.push_back(baseline ? baseline_values(*baseline, terms.trajectory)
                              : std::vector<double>(terms.trajectory.size(), 0.0));
  estimates_ = estimates_for(values);
  for (std::size_t k = 0; k < terms_.size(); ++k) terms_[k].baseline_values = std::move(values[k]);
  gradient_sum_ = estimates_.front().g;
  for (std::size_t k = 1; k < estimates_.size(); ++k) gradient_sum_ += estimates_[k].g;
}

std::vector<GradEstimate> BatchContext::estimates_for(std::span<const std::vector<double>> values) const {
  if (values.size() != terms_.size()) throw ContractError("one baseline value list per trajectory required");
  std::vector<GradEstimate> out;
  out.reserve(terms_.size());
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const auto& terms = terms_[k];
    if (terms.scores)
      out.push_back(baselined_gradient(terms.trajectory, *terms.scores, terms.returns, values[k], k));
    else
      out.push_back(baselined_gradient(terms.trajectory, policy_, gamma_, terms.returns, values[k], k));
  }
  return out;
}

std::vector<GradEstimate> BatchContext::zero_baseline_estimates() const {
  std::vector<std::vector<double>> zeros;
  for (const auto& terms : terms_) zeros.emplace_back(terms.trajectory.size(), 0.0);
  return estimates_for(zeros);
}

BatchContext BatchContext::rebaselined(const Mlp* baseline) const {
  BatchContext copy = *this;
  copy.assign_baseline(baseline);
  return copy;
}

std::vector<double> BatchContext::score_dots(std::size_t k, const ParamVector& direction) const {
  const auto& terms = terms_[k];
  std::vector<double> dots(terms.trajectory.size());
  for (std::size_t t = 0; t < dots.size(); ++t) {
    if (terms.scores) {
      dots[t] = terms.scores->u[t].dot(direction);
    } else {
      const auto& tr = terms.trajectory.transitions[t];
      dots[t] = policy_.score_dot(tr.state, tr.action, direction);
    }
  }
  return dots;
}

double BatchContext::max_score_norm() const {
  double best = 0.0;
  for (const auto& terms : terms_) {
    for (std::size_t t = 0; t < terms.trajectory.size(); ++t) {
      const double n = terms.scores ? terms.scores->u[t].norm()
                                    : policy_
                                          .score_gradient(terms.trajectory.transitions[t].state,
                                                          terms.trajectory.transitions[t].action)
                                          .norm();
      best = std::max(best, n);
    }
  }
  return best;
}

std::size_t BatchContext::max_length() const {
  std::size_t n = 0;
  for (const auto& terms : terms_) n = std::max(n, terms.trajectory.size());
  return n;
}

double BatchContext::max_abs_reward() const {
  double r = 0.0;
  for (const auto& terms : terms_)
    for (const auto& tr : terms.trajectory.transitions) r = std::max(r, std::abs(tr.reward));
  return r;
}

namespace {

void check_baseline(const BatchContext& ctx, const Mlp& baseline) {
  if (baseline.shape().output_dim() != 1) throw ShapeError("baseline network must have a single output");
  if (baseline.shape().input_dim() != ctx.policy().state_dim())
    throw ShapeError("baseline input does not match the state dimension");
}

// sum_k sum_t coef(k)[t] * grad_phi b(S_t^k), with coef(k) supplied per trajectory.
template <typename CoefFn>
ParamVector accumulate_baseline_grad(const BatchContext& ctx, const Mlp& baseline, CoefFn coef) {
  ParamVector grad = ParamVector::Zero(static_cast<Eigen::Index>(baseline.param_count()));
  const Vector one = Vector::Ones(1);
  for (std::size_t k = 0; k < ctx.size(); ++k) {
    const std::vector<double> c = coef(k);
    const auto& traj = ctx.terms(k).trajectory;
    for (std::size_t t = 0; t < traj.size(); ++t)
      if (c[t] != 0.0) baseline.accumulate_backward(traj.transitions[t].state, one, c[t], grad);
  }
  return grad;
}

}  // namespace

double a2c_loss(const BatchContext& ctx) {
  double sum = 0.0;
  for (std::size_t k = 0; k < ctx.size(); ++k) {
    const auto& terms = ctx.terms(k);
    for (std::size_t t = 0; t < terms.returns.size(); ++t) {
      const double r = terms.returns[t] - terms.baseline_values[t];
      sum += r * r;
    }
  }
  return sum / static_cast<double>(ctx.size());
}

double evm_loss(const BatchContext& ctx) {
  double sum = 0.0;
  for (const auto& e : ctx.estimates()) sum += e.g.squaredNorm();
  return sum / static_cast<double>(ctx.size());
}

namespace {

// (1/K) sum ||g_k - mean||^2, equal to (1/K) sum ||g_k||^2 - (1/K^2) ||sum g_k||^2
// without the cancellation of the expanded form.
double centered_second_moment(const BatchContext& ctx) {
  const ParamVector mean = ctx.mean_gradient();
  double sum = 0.0;
  for (const auto& e : ctx.estimates()) sum += (e.g - mean).squaredNorm();
  return sum / static_cast<double>(ctx.size());
}

}  // namespace

double evv_loss(const BatchContext& ctx) {
  if (ctx.size() < 2) throw ConfigError("evv criterion requires batch size K >= 2 (variance from one sample)");
  return centered_second_moment(ctx);
}

CriterionValue a2c_loss_and_grad(const BatchContext& ctx, const Mlp& baseline) {
  check_baseline(ctx, baseline);
  const double scale = -2.0 / static_cast<double>(ctx.size());
  ParamVector grad = accumulate_baseline_grad(ctx, baseline, [&](std::size_t k) {
    const auto& terms = ctx.terms(k);
    std::vector<double> c(terms.returns.size());
    for (std::size_t t = 0; t < c.size(); ++t) c[t] = scale * (terms.returns[t] - terms.baseline_values[t]);
    return c;
  });
  return {a2c_loss(ctx), std::move(grad)};
}

namespace {

// g_k is affine in the baseline outputs: d g_k / d b_t = -gamma^t u_t. Hence
// d/d phi (1/K) sum ||g_k - shift||^2 = -(2/K) sum_k sum_t gamma^t ((g_k - shift) . u_t) grad b(S_t).
ParamVector ev_baseline_grad(const BatchContext& ctx, const Mlp& baseline, const ParamVector* shift) {
  const double scale = -2.0 / static_cast<double>(ctx.size());
  return accumulate_baseline_grad(ctx, baseline, [&](std::size_t k) {
    const ParamVector& g = ctx.estimates()[k].g;
    std::vector<double> c = shift ? ctx.score_dots(k, g - *shift) : ctx.score_dots(k, g);
    const auto& w = ctx.terms(k).gamma_weights;
    for (std::size_t t = 0; t < c.size(); ++t) c[t] *= scale * w[t];
    return c;
  });
}

}  // namespace

CriterionValue evm_loss_and_grad(const BatchContext& ctx, const Mlp& baseline) {
  check_baseline(ctx, baseline);
  return {evm_loss(ctx), ev_baseline_grad(ctx, baseline, nullptr)};
}

CriterionValue evv_loss_and_grad(const BatchContext& ctx, const Mlp& baseline) {
  check_baseline(ctx, baseline);
  const double loss = evv_loss(ctx);
  // The -(1/K^2)||sum g||^2 term contributes +(2/K^2) sum_k sum_t gamma^t (sum g . u_t) grad b,
  // which folds into the evm form with every g_k shifted by the batch mean.
  const ParamVector mean = ctx.mean_gradient();
  return {loss, ev_baseline_grad(ctx, baseline, &mean)};
}

CriterionValue loss_and_grad(CriterionKind kind, const BatchContext& ctx, const Mlp& baseline) {
  switch (kind) {
    case CriterionKind::a2c:
      return a2c_loss_and_grad(ctx, baseline);
    case CriterionKind::evm:
      return evm_loss_and_grad(ctx, baseline);
    case CriterionKind::evv:
      return evv_loss_and_grad(ctx, baseline);
    case CriterionKind::none:
      break;
  }
  return {0.0, ParamVector::Zero(static_cast<Eigen::Index>(baseline.param_count()))};
}

InequalityReport criterion_inequality_report(const BatchContext& ctx) {
  InequalityReport r;
  r.batch_size = ctx.size();
  r.v_evv = centered_second_moment(ctx);
  r.v_evm = evm_loss(ctx);
  r.v_a2c = a2c_loss(ctx);
  r.c_hat_l = ctx.max_score_norm();
  r.max_length = ctx.max_length();
  for (double w : discount_weights(r.max_length, ctx.gamma())) r.s_gamma += w;
  const double c2 = r.c_hat_l * r.c_hat_l;
  r.jensen_holds = r.v_evv <= r.v_evm + inequality_slack;
  r.cauchy_schwarz_holds = r.v_evm <= c2 * r.s_gamma * r.v_a2c + inequality_slack;
  r.two_cl_squared_holds = r.v_evm <= 2.0 * c2 * r.v_a2c + inequality_slack;
  return r;
}

std::ostream& operator<<(std::ostream& os, const InequalityReport& r) {
  return os << "K=" << r.batch_size << " T_max=" << r.max_length << " V_evv=" << r.v_evv << " V_evm=" << r.v_evm
            << " V_a2c=" << r.v_a2c << " C_L=" << r.c_hat_l << " S_gamma=" << r.s_gamma
            << " jensen=" << r.jensen_holds << " cauchy_schwarz=" << r.cauchy_schwarz_holds
            << " two_cl_squared=" << r.two_cl_squared_holds;
}

}  // namespace evgrad
