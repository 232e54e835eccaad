#include "evgrad/envs.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "evgrad/errors.hpp"

namespace evgrad {

std::vector<double> Trajectory::rewards() const {
  std::vector<double> r;
  r.reserve(transitions.size());
  for (const auto& t : transitions) r.push_back(t.reward);
  return r;
}

double Trajectory::total_reward() const {
  double sum = 0.0;
  for (const auto& t : transitions) sum += t.reward;
  return sum;
}

void ChainSpec::validate() const {
  if (num_states < 1 || num_actions < 1) throw ConfigError("chain needs at least one state and one action");
  if (rewards.size() != num_states * num_actions)
    throw ConfigError("chain reward table needs states*actions = " + std::to_string(num_states * num_actions) +
                      " entries, got " + std::to_string(rewards.size()));
  if (transitions.size() != num_states * num_actions * num_states)
    throw ConfigError("chain transition table needs states*actions*states = " +
                      std::to_string(num_states * num_actions * num_states) + " entries, got " +
                      std::to_string(transitions.size()));
  if (terminal.size() != num_states) throw ConfigError("chain terminal flags need one entry per state");
  if (terminal[0]) throw ConfigError("chain start state 0 cannot be terminal");
  for (std::size_t s = 0; s < num_states; ++s)
    for (std::size_t a = 0; a < num_actions; ++a) {
      double sum = 0.0;
      for (std::size_t n = 0; n < num_states; ++n) {
        const double p = transition(s, a, n);
        if (!(p >= 0.0)) throw ConfigError("chain transition probabilities must be non-negative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigError("chain transition row (" + std::to_string(s) + ", " + std::to_string(a) +
                          ") does not sum to 1");
      if (!std::isfinite(reward(s, a))) throw ConfigError("chain rewards must be finite");
    }
}

std::string_view to_string(EnvKind kind) { return kind == EnvKind::cartpole ? "cartpole" : "chain"; }

EnvKind parse_env_kind(std::string_view name) {
  if (name == "cartpole") return EnvKind::cartpole;
  if (name == "chain") return EnvKind::chain;
  throw ConfigError("unknown environment '" + std::string(name) + "' (expected cartpole or chain)");
}

std::size_t EnvSpec::observation_dim() const { return kind == EnvKind::cartpole ? 4 : chain->num_states; }

std::size_t EnvSpec::action_count() const { return kind == EnvKind::cartpole ? 2 : chain->num_actions; }

void EnvSpec::validate() const {
  if (horizon_cap < 1) throw ConfigError("horizon cap must be positive");
  if (kind == EnvKind::chain) {
    if (!chain) throw ConfigError("chain environment requires chain tables");
    chain->validate();
  }
}

EnvSpec make_cartpole(std::size_t horizon_cap) { return EnvSpec{EnvKind::cartpole, horizon_cap, std::nullopt}; }

EnvSpec make_bandit(std::vector<double> action_rewards) {
  ChainSpec c;
  c.num_states = 1;
  c.num_actions = action_rewards.size();
  c.rewards = std::move(action_rewards);
  c.transitions.assign(c.num_actions, 1.0);
  c.terminal = {false};
  return EnvSpec{EnvKind::chain, 1, std::move(c)};
}

EnvSpec make_test_chain(std::size_t horizon_cap) {
  ChainSpec c;
  c.num_states = 4;
  c.num_actions = 2;
  // action 0 drifts left, action 1 pushes right; state 3 is the absorbing goal.
  c.rewards = {0.0, -0.1,   //
               0.3, -0.1,   //
               0.6, 1.0,    //
               0.0, 0.0};
  c.transitions = {
      0.9, 0.1, 0.0, 0.0,  0.2, 0.8, 0.0, 0.0,  // s0
      0.7, 0.3, 0.0, 0.0,  0.0, 0.2, 0.8, 0.0,  // s1
      0.0, 0.6, 0.4, 0.0,  0.0, 0.0, 0.3, 0.7,  // s2
      0.0, 0.0, 0.0, 1.0,  0.0, 0.0, 0.0, 1.0,  // s3
  };
  c.terminal = {false, false, false, true};
  return EnvSpec{EnvKind::chain, horizon_cap, std::move(c)};
}

EnvSpec make_random_chain(std::uint64_t seed, std::size_t states, std::size_t actions, std::size_t horizon_cap) {
  if (states < 2 || actions < 1) throw ConfigError("random chain needs >= 2 states and >= 1 action");
  RandomStream rng(seed);
  ChainSpec c;
  c.num_states = states;
  c.num_actions = actions;
  c.rewards.resize(states * actions);
  for (auto& r : c.rewards) r = rng.uniform(-1.0, 1.0);
  c.transitions.resize(states * actions * states);
  for (std::size_t row = 0; row < states * actions; ++row) {
    double sum = 0.0;
    for (std::size_t n = 0; n < states; ++n) sum += c.transitions[row * states + n] = rng.uniform();
    for (std::size_t n = 0; n < states; ++n) c.transitions[row * states + n] /= sum;
    // Rows sum to 1 up to rounding; push the residue into the last entry.
    double check = 0.0;
    for (std::size_t n = 0; n + 1 < states; ++n) check += c.transitions[row * states + n];
    c.transitions[row * states + states - 1] = 1.0 - check;
  }
  c.terminal.assign(states, false);
  c.terminal.back() = true;
  return EnvSpec{EnvKind::chain, horizon_cap, std::move(c)};
}

namespace {

std::size_t chain_index(const ChainSpec& chain, const Vector& state) {
  if (static_cast<std::size_t>(state.size()) != chain.num_states) throw ShapeError("chain state has wrong dimension");
  Eigen::Index idx = 0;
  state.maxCoeff(&idx);
  return static_cast<std::size_t>(idx);
}

Vector one_hot(std::size_t n, std::size_t i) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  v[static_cast<Eigen::Index>(i)] = 1.0;
  return v;
}

}  // namespace

Vector reset(const EnvSpec& env, RandomStream& rng) {
  if (env.kind == EnvKind::chain) return one_hot(env.chain->num_states, 0);
  Vector s(4);
  for (Eigen::Index i = 0; i < 4; ++i) s[i] = rng.uniform(-0.05, 0.05);
  return s;
}

StepResult step(const EnvSpec& env, const Vector& state, std::size_t action, RandomStream& rng) {
  if (action >= env.action_count())
    throw ContractError("action " + std::to_string(action) + " is invalid for " + std::string(to_string(env.kind)));

  if (env.kind == EnvKind::chain) {
    const auto& c = *env.chain;
    const std::size_t s = chain_index(c, state);
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t next = c.num_states - 1;
    for (std::size_t n = 0; n < c.num_states; ++n) {
      const double p = c.transition(s, action, n);
      if (p <= 0.0) continue;
      cumulative += p;
      next = n;
      if (u < cumulative) break;
    }
    return {one_hot(c.num_states, next), c.reward(s, action), static_cast<bool>(c.terminal[next])};
  }

  using namespace cartpole;
  if (state.size() != 4) throw ShapeError("cartpole state has 4 components");
  double x = state[0], x_dot = state[1], theta = state[2], theta_dot = state[3];
  const double force = action == 1 ? force_mag : -force_mag;
  const double costheta = std::cos(theta);
  const double sintheta = std::sin(theta);
  const double temp = (force + pole_mass_length * theta_dot * theta_dot * sintheta) / total_mass;
  const double thetaacc =
      (gravity * sintheta - costheta * temp) / (half_length * (4.0 / 3.0 - pole_mass * costheta * costheta / total_mass));
  const double xacc = temp - pole_mass_length * thetaacc * costheta / total_mass;
  // Euler integrator of the reference environment: positions move with the old velocities.
  x += tau * x_dot;
  x_dot += tau * xacc;
  theta += tau * theta_dot;
  theta_dot += tau * thetaacc;

  Vector next(4);
  next << x, x_dot, theta, theta_dot;
  const bool done = x < -x_threshold || x > x_threshold || theta < -theta_threshold || theta > theta_threshold;
  return {std::move(next), 1.0, done};
}

Trajectory rollout(const EnvSpec& env, const SoftmaxPolicy& policy, RandomStream& rng) {
  if (policy.state_dim() != env.observation_dim())
    throw ShapeError("policy input dimension " + std::to_string(policy.state_dim()) +
                     " does not match observation dimension " + std::to_string(env.observation_dim()));
  Trajectory traj;
  Vector state = reset(env, rng);
  while (traj.size() < env.horizon_cap) {
    const std::size_t action = policy.sample_action(state, rng);
    StepResult r = step(env, state, action, rng);
    traj.transitions.push_back({std::move(state), action, r.reward});
    if (r.done) {
      traj.terminal = true;
      break;
    }
    state = std::move(r.next_state);
  }
  return traj;
}

namespace {

struct Enumerator {
  const EnvSpec& env;
  const ChainSpec& chain;
  const SoftmaxPolicy& policy;
  std::vector<WeightedTrajectory> leaves;
  Trajectory prefix;

  void emit(double probability, bool terminal) {
    if (leaves.size() >= max_enumerated_trajectories)
      throw ResourceError("trajectory enumeration exceeds " + std::to_string(max_enumerated_trajectories) + " leaves");
    Trajectory t = prefix;
    t.terminal = terminal;
    leaves.push_back({std::move(t), probability});
  }

  void expand(std::size_t s, double probability) {
    const Vector obs = one_hot(chain.num_states, s);
    const Vector probs = policy.action_probs(obs);
    for (std::size_t a = 0; a < chain.num_actions; ++a) {
      const double pa = probs[static_cast<Eigen::Index>(a)];
      prefix.transitions.push_back({obs, a, chain.reward(s, a)});
      for (std::size_t n = 0; n < chain.num_states; ++n) {
        const double pn = chain.transition(s, a, n);
        if (pn <= 0.0) continue;
        const double p = probability * pa * pn;
        if (chain.terminal[n])
          emit(p, true);
        else if (prefix.size() >= env.horizon_cap)
          emit(p, false);
        else
          expand(n, p);
      }
      prefix.transitions.pop_back();
    }
  }
};

}  // namespace

std::vector<WeightedTrajectory> enumerate_trajectories(const EnvSpec& env, const SoftmaxPolicy& policy) {
  if (env.kind != EnvKind::chain) throw ContractError("only chain environments can be enumerated");
  env.validate();
  if (policy.state_dim() != env.observation_dim()) throw ShapeError("policy input does not match chain states");
  Enumerator e{env, *env.chain, policy, {}, {}};
  e.expand(0, 1.0);
  return std::move(e.leaves);
}

}  // namespace evgrad
