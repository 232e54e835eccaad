#pragma once

#include <cstddef>

#include "evgrad/nn.hpp"
#include "evgrad/random.hpp"

namespace evgrad {

// Categorical policy pi(a|s) = softmax(net(s))_a over a discrete action set.
class SoftmaxPolicy {
 public:
  explicit SoftmaxPolicy(Mlp net);

  const Mlp& net() const { return net_; }
  const ParamVector& theta() const { return net_.params(); }
  std::size_t action_count() const { return net_.shape().output_dim(); }
  std::size_t state_dim() const { return net_.shape().input_dim(); }

  // log softmax of the logits via a max-shifted log-sum-exp.
  Vector action_log_probs(const Vector& state) const;
  Vector action_probs(const Vector& state) const;

  // Inverse-CDF draw; consumes exactly one uniform from rng.
  std::size_t sample_action(const Vector& state, RandomStream& rng) const;

  // grad_theta log pi(action | state).
  ParamVector score_gradient(const Vector& state, std::size_t action) const;

  // out += scale * score_gradient(state, action).
  void accumulate_score(const Vector& state, std::size_t action, double scale, Eigen::Ref<ParamVector> out) const;

  // dot(score_gradient(state, action), direction) without forming the score.
  double score_dot(const Vector& state, std::size_t action, const ParamVector& direction) const;

 private:
  // onehot(action) - softmax(logits): the row of the log-softmax Jacobian.
  Vector score_output_weights(const Vector& logits, std::size_t action) const;

  Mlp net_;
};

}  // namespace evgrad
