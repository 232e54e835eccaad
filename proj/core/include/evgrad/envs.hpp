#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "evgrad/nn.hpp"
#include "evgrad/policy.hpp"
#include "evgrad/random.hpp"

namespace evgrad {

struct Transition {
  Vector state;  // observation before the action
  std::size_t action = 0;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<Transition> transitions;
  bool terminal = false;  // ended by the environment rather than the horizon cap

  std::size_t size() const { return transitions.size(); }
  std::vector<double> rewards() const;
  double total_reward() const;
};

// Tabular episodic MDP with (state, action) rewards. States are observed one-hot.
struct ChainSpec {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> rewards;      // [s * A + a]
  std::vector<double> transitions;  // [(s * A + a) * S + s']
  std::vector<bool> terminal;       // entering a terminal state ends the episode

  double reward(std::size_t s, std::size_t a) const { return rewards[s * num_actions + a]; }
  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    return transitions[(s * num_actions + a) * num_states + next];
  }
  void validate() const;
};

enum class EnvKind { cartpole, chain };

std::string_view to_string(EnvKind kind);
EnvKind parse_env_kind(std::string_view name);

struct EnvSpec {
  EnvKind kind = EnvKind::cartpole;
  std::size_t horizon_cap = 500;
  std::optional<ChainSpec> chain;  // required when kind == chain

  std::size_t observation_dim() const;
  std::size_t action_count() const;
  void validate() const;
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;  // failure or terminal state; the horizon cap is applied by rollout
};

namespace cartpole {
inline constexpr double gravity = 9.8;
inline constexpr double cart_mass = 1.0;
inline constexpr double pole_mass = 0.1;
inline constexpr double total_mass = cart_mass + pole_mass;
inline constexpr double half_length = 0.5;
inline constexpr double pole_mass_length = pole_mass * half_length;
inline constexpr double force_mag = 10.0;
inline constexpr double tau = 0.02;
inline constexpr double x_threshold = 2.4;
inline constexpr double theta_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
}  // namespace cartpole

EnvSpec make_cartpole(std::size_t horizon_cap = 500);
// Single-state bandit with the given per-action rewards; each episode is one pull.
EnvSpec make_bandit(std::vector<double> action_rewards);
// Four-state two-action chain with stochastic moves and an absorbing goal (state 3).
EnvSpec make_test_chain(std::size_t horizon_cap = 4);
// Random dense transition and reward tables; the last state is terminal.
EnvSpec make_random_chain(std::uint64_t seed, std::size_t states, std::size_t actions, std::size_t horizon_cap);

Vector reset(const EnvSpec& env, RandomStream& rng);
StepResult step(const EnvSpec& env, const Vector& state, std::size_t action, RandomStream& rng);

// Samples actions from policy until done or the horizon cap binds.
Trajectory rollout(const EnvSpec& env, const SoftmaxPolicy& policy, RandomStream& rng);

struct WeightedTrajectory {
  Trajectory trajectory;
  double probability = 0.0;
};

inline constexpr std::size_t max_enumerated_trajectories = 1'000'000;

// Every action/transition outcome sequence of a chain MDP with its probability.
// Throws ResourceError past max_enumerated_trajectories leaves.
std::vector<WeightedTrajectory> enumerate_trajectories(const EnvSpec& env, const SoftmaxPolicy& policy);

}  // namespace evgrad
