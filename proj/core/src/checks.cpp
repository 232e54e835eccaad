#include "evgrad/checks.hpp"

#include <algorithm>
#include <cmath>

#include "evgrad/criteria.hpp"
#include "evgrad/envs.hpp"
#include "evgrad/estimators.hpp"
#include "evgrad/nn.hpp"
#include "evgrad/policy.hpp"
#include "evgrad/probes.hpp"
#include "evgrad/random.hpp"

namespace evgrad {

namespace {

constexpr Activation activations[] = {Activation::tanh, Activation::relu, Activation::mish};

std::size_t pick(RandomStream& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.next_u64() % (hi - lo + 1));
}

Vector random_vector(RandomStream& rng, std::size_t n, double scale) {
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

// Network with every weight and bias drawn uniformly, so no coordinate is trivially zero.
Mlp random_mlp(RandomStream& rng, std::vector<std::size_t> sizes, Activation act, double scale = 1.0) {
  MlpShape shape{std::move(sizes), act};
  return Mlp(shape, random_vector(rng, shape.param_count(), scale));
}

std::vector<std::size_t> random_sizes(RandomStream& rng, std::size_t in, std::size_t out) {
  std::vector<std::size_t> sizes{in};
  const std::size_t hidden = pick(rng, 0, 2);
  for (std::size_t h = 0; h < hidden; ++h) sizes.push_back(pick(rng, 2, 6));
  sizes.push_back(out);
  return sizes;
}

struct CriterionInstance {
  EnvSpec env;
  SoftmaxPolicy policy;
  Mlp baseline;
  double gamma;
  std::vector<Trajectory> batch;
};

CriterionInstance random_criterion_instance(RandomStream& rng, std::size_t index) {
  const bool chain = index % 2 == 0;
  EnvSpec env = chain ? make_random_chain(rng.next_u64(), pick(rng, 2, 5), pick(rng, 2, 3), pick(rng, 1, 6))
                      : make_cartpole(pick(rng, 5, 40));
  const Activation act = activations[index % 3];
  SoftmaxPolicy policy(random_mlp(rng, random_sizes(rng, env.observation_dim(), env.action_count()), act));
  Mlp baseline = random_mlp(rng, random_sizes(rng, env.observation_dim(), 1), activations[(index / 3) % 3]);
  const double gamma = rng.uniform(0.5, 1.0);
  std::vector<Trajectory> batch;
  const std::size_t k = pick(rng, 2, 5);
  for (std::size_t i = 0; i < k; ++i) batch.push_back(rollout(env, policy, rng));
  return {std::move(env), std::move(policy), std::move(baseline), gamma, std::move(batch)};
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed, std::size_t instances) {
  RandomStream rng(seed);
  GradCheckResult backward{"nn backward_weighted", 0, 0.0};
  GradCheckResult score{"policy score_gradient", 0, 0.0};
  GradCheckResult a2c{"a2c baseline gradient", 0, 0.0};
  GradCheckResult evm{"evm baseline gradient", 0, 0.0};
  GradCheckResult evv{"evv baseline gradient", 0, 0.0};

  for (std::size_t i = 0; i < instances; ++i) {
    const Activation act = activations[i % 3];
    const std::size_t in = pick(rng, 1, 4);
    const std::size_t out = pick(rng, 1, 3);
    const Mlp net = random_mlp(rng, random_sizes(rng, in, out), act);
    const Vector x = random_vector(rng, in, 2.0);
    const Vector w = random_vector(rng, out, 1.0);
    const ParamVector analytic = net.backward_weighted(x, w);
    const ParamVector numeric = finite_diff_grad(
        [&](const ParamVector& p) { return w.dot(Mlp(net.shape(), p).forward(x)); }, net.params(), gradcheck_step);
    backward.max_relative_error = std::max(backward.max_relative_error, relative_error(analytic, numeric));
    ++backward.instances;
  }

  for (std::size_t i = 0; i < instances; ++i) {
    const Activation act = activations[i % 3];
    const std::size_t in = pick(rng, 1, 4);
    const std::size_t actions = pick(rng, 2, 4);
    const SoftmaxPolicy policy(random_mlp(rng, random_sizes(rng, in, actions), act));
    const Vector s = random_vector(rng, in, 2.0);
    const std::size_t a = pick(rng, 0, actions - 1);
    const ParamVector analytic = policy.score_gradient(s, a);
    const ParamVector numeric = finite_diff_grad(
        [&](const ParamVector& p) {
          return SoftmaxPolicy(Mlp(policy.net().shape(), p)).action_log_probs(s)[static_cast<Eigen::Index>(a)];
        },
        policy.theta(), gradcheck_step);
    score.max_relative_error = std::max(score.max_relative_error, relative_error(analytic, numeric));
    ++score.instances;
  }

  for (std::size_t i = 0; i < instances; ++i) {
    const CriterionInstance inst = random_criterion_instance(rng, i);
    const BatchContext ctx(inst.batch, inst.policy, &inst.baseline, inst.gamma);
    const auto loss_at = [&](double (*loss)(const BatchContext&)) {
      return [&ctx, &inst, loss](const ParamVector& p) {
        const Mlp b(inst.baseline.shape(), p);
        return loss(ctx.rebaselined(&b));
      };
    };
    const auto check = [&](GradCheckResult& r, const CriterionValue& v, double (*loss)(const BatchContext&)) {
      const ParamVector numeric = finite_diff_grad(loss_at(loss), inst.baseline.params(), gradcheck_step);
      r.max_relative_error = std::max(r.max_relative_error, relative_error(v.grad, numeric));
      ++r.instances;
    };
    check(a2c, a2c_loss_and_grad(ctx, inst.baseline), a2c_loss);
    check(evm, evm_loss_and_grad(ctx, inst.baseline), evm_loss);
    check(evv, evv_loss_and_grad(ctx, inst.baseline), evv_loss);
  }
  return {backward, score, a2c, evm, evv};
}

std::vector<OracleCheckResult> run_oracle_checks(std::uint64_t seed, std::size_t pairs) {
  RandomStream rng(seed);
  OracleCheckResult closure{"enumerated probabilities sum to 1", 0.0, 1e-10};
  OracleCheckResult baseline_term{"S-baseline term has zero expectation", 0.0, 1e-10};
  OracleCheckResult bandit{"bandit REINFORCE oracle equals softmax gradient", 0.0, 1e-10};

  for (std::size_t i = 0; i < pairs; ++i) {
    const EnvSpec env = i % 2 == 0 ? make_test_chain(4) : make_random_chain(rng.next_u64(), 4, 2, 4);
    const SoftmaxPolicy policy(
        random_mlp(rng, random_sizes(rng, env.observation_dim(), env.action_count()), activations[i % 3]));
    const Mlp baseline = random_mlp(rng, random_sizes(rng, env.observation_dim(), 1), activations[(i + 1) % 3], 2.0);
    const double gamma = rng.uniform(0.5, 1.0);

    double total = 0.0;
    for (const auto& leaf : enumerate_trajectories(env, policy)) total += leaf.probability;
    closure.max_abs_error = std::max(closure.max_abs_error, std::abs(total - 1.0));

    const ParamVector with = exact_gradient_oracle(env, policy, &baseline, gamma);
    const ParamVector without = exact_gradient_oracle(env, policy, nullptr, gamma);
    baseline_term.max_abs_error = std::max(baseline_term.max_abs_error, (with - without).cwiseAbs().maxCoeff());
  }

  // One state, two actions, rewards (1, 0), theta = 0: J = softmax_0, dJ/dlogits = (1/4, -1/4).
  const EnvSpec env = make_bandit({1.0, 0.0});
  const SoftmaxPolicy policy(Mlp(MlpShape{{1, 2}, Activation::tanh}, ParamVector::Zero(4)));
  const ParamVector g = exact_gradient_oracle(env, policy, nullptr, 1.0);
  Vector expected(4);
  expected << 0.25, -0.25, 0.25, -0.25;  // weights then biases; the bandit state is the constant 1
  bandit.max_abs_error = (g - expected).cwiseAbs().maxCoeff();

  return {closure, baseline_term, bandit};
}

}  // namespace evgrad
