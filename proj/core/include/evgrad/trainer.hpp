#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "evgrad/criteria.hpp"
#include "evgrad/envs.hpp"
#include "evgrad/metrics.hpp"
#include "evgrad/nn.hpp"
#include "evgrad/probes.hpp"

namespace evgrad {

enum class StepDecay { constant, inverse_time };

std::string_view to_string(StepDecay d);
StepDecay parse_step_decay(std::string_view name);

struct StepSchedule {
  double initial = 1e-3;
  StepDecay decay = StepDecay::constant;
  double half_life = 1000.0;  // inverse_time only

  bool operator==(const StepSchedule&) const = default;
};

// constant: initial; inverse_time: initial / (1 + n / half_life).
double step_size(const StepSchedule& schedule, std::size_t n);

// Parameter update applied to the policy ascent and the baseline descent directions.
//   sgd   x += step * direction, the plain two-timescale scheme
//   adam  direction is rescaled by Adam moment estimates before the step
enum class UpdateRule { sgd, adam };

std::string_view to_string(UpdateRule r);
UpdateRule parse_update_rule(std::string_view name);

struct TrainConfig {
  EnvSpec env = make_cartpole(500);
  MlpShape policy{{4, 128, 128, 2}, Activation::mish};
  std::uint64_t policy_seed = 1;
  MlpShape baseline{{4, 128, 1}, Activation::mish};
  std::uint64_t baseline_seed = 2;
  std::size_t batch_size = 8;
  double gamma = 0.99;
  std::size_t epochs = 1000;
  StepSchedule alpha{1e-3, StepDecay::constant, 1000.0};
  StepSchedule beta{1e-2, StepDecay::constant, 1000.0};
  UpdateRule update = UpdateRule::adam;
  CriterionKind criterion = CriterionKind::evm;
  std::size_t probe_every = 200;
  std::size_t probe_pool = 50;
  std::uint64_t seed = 0;  // master seed; every stream derives from it
  bool record_wall_time = false;

  // Throws ConfigError naming the violated constraint.
  void validate() const;
};

// Adam first/second moment estimates for one parameter vector.
struct AdamMoments {
  ParamVector m;
  ParamVector v;
};

struct TrainState {
  ParamVector theta;
  ParamVector phi;
  std::size_t epoch = 0;  // completed epochs
  std::uint64_t seed = 0;
  AdamMoments theta_moments;
  AdamMoments phi_moments;
};

struct EpochSummary {
  std::size_t epoch = 0;  // 1-based index of the finished epoch
  std::vector<double> episode_rewards;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  std::size_t steps = 0;
  double a2c_loss = 0.0;
  double evm_loss = 0.0;
  std::optional<double> evv_loss;
};

// Network initialisation for a config: seeds are mixed with the master seed.
TrainState initial_state(const TrainConfig& cfg);

// Rolls out K trajectories, ascends theta with the batch-mean estimate and
// descends phi on the configured criterion evaluated at the same batch.
std::pair<TrainState, EpochSummary> train_epoch(const TrainState& state, const TrainConfig& cfg);

// Fresh probe pool for the state's current parameters, drawn from its own stream.
VarianceReport probe_state(const TrainState& state, const TrainConfig& cfg);

// Runs cfg.epochs epochs, probing every cfg.probe_every epochs, and appends one
// record per epoch to sink.
TrainState run_experiment(const TrainConfig& cfg, MetricsSink& sink);

}  // namespace evgrad
