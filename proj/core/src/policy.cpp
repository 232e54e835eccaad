#include "evgrad/policy.hpp"

#include <cmath>
#include <string>

#include "evgrad/errors.hpp"

namespace evgrad {

namespace {

Vector log_softmax(const Vector& logits) {
  // Lowest index wins ties, so the shift is deterministic.
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[arg]) arg = i;
  const double m = logits[arg];
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - m);
  return logits.array() - (m + std::log(sum));
}

}  // namespace

SoftmaxPolicy::SoftmaxPolicy(Mlp net) : net_(std::move(net)) {}

Vector SoftmaxPolicy::action_log_probs(const Vector& state) const { return log_softmax(net_.forward(state)); }

Vector SoftmaxPolicy::action_probs(const Vector& state) const { return action_log_probs(state).array().exp(); }

std::size_t SoftmaxPolicy::sample_action(const Vector& state, RandomStream& rng) const {
  const Vector probs = action_probs(state);
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (Eigen::Index a = 0; a < probs.size(); ++a) {
    cumulative += probs[a];
    if (u < cumulative) return static_cast<std::size_t>(a);
  }
  return static_cast<std::size_t>(probs.size() - 1);
}

Vector SoftmaxPolicy::score_output_weights(const Vector& logits, std::size_t action) const {
  if (action >= action_count())
    throw ContractError("action " + std::to_string(action) + " out of range for " + std::to_string(action_count()) +
                        " actions");
  Vector w = -log_softmax(logits).array().exp();
  w[static_cast<Eigen::Index>(action)] += 1.0;
  return w;
}

ParamVector SoftmaxPolicy::score_gradient(const Vector& state, std::size_t action) const {
  ParamVector grad = ParamVector::Zero(theta().size());
  accumulate_score(state, action, 1.0, grad);
  return grad;
}

void SoftmaxPolicy::accumulate_score(const Vector& state, std::size_t action, double scale,
                                     Eigen::Ref<ParamVector> out) const {
  const ForwardTape tape = net_.record(state);
  net_.accumulate_backward(tape, score_output_weights(tape.output, action), scale, out);
}

double SoftmaxPolicy::score_dot(const Vector& state, std::size_t action, const ParamVector& direction) const {
  const ForwardTape tape = net_.record(state);
  return score_output_weights(tape.output, action).dot(net_.output_tangent(tape, direction));
}

}  // namespace evgrad
