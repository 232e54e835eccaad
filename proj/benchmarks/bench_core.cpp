#include <benchmark/benchmark.h>

#include "evgrad/criteria.hpp"
#include "evgrad/envs.hpp"
#include "evgrad/trainer.hpp"

namespace {

using namespace evgrad;

const MlpShape policy_shape{{4, 128, 128, 2}, Activation::mish};
const MlpShape baseline_shape{{4, 128, 1}, Activation::mish};

Vector probe_state() { return (Vector(4) << 0.01, -0.2, 0.03, 0.1).finished(); }

void BM_Forward(benchmark::State& state) {
  const Mlp net = init_params(policy_shape, 1);
  const Vector x = probe_state();
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_Forward);

void BM_ScoreGradient(benchmark::State& state) {
  const SoftmaxPolicy policy(init_params(policy_shape, 1));
  const Vector x = probe_state();
  for (auto _ : state) benchmark::DoNotOptimize(policy.score_gradient(x, 1));
}
BENCHMARK(BM_ScoreGradient);

void BM_ScoreDot(benchmark::State& state) {
  const SoftmaxPolicy policy(init_params(policy_shape, 1));
  const ParamVector dir = init_params(policy_shape, 2).params();
  const Vector x = probe_state();
  for (auto _ : state) benchmark::DoNotOptimize(policy.score_dot(x, 1, dir));
}
BENCHMARK(BM_ScoreDot);

std::vector<Trajectory> cartpole_batch(const SoftmaxPolicy& policy, std::size_t k) {
  std::vector<Trajectory> batch;
  for (std::size_t i = 0; i < k; ++i) {
    RandomStream rng(7, StreamTag::rollout, 0, i);
    batch.push_back(rollout(make_cartpole(), policy, rng));
  }
  return batch;
}

void BM_CriterionGradient(benchmark::State& state) {
  const auto kind = static_cast<CriterionKind>(state.range(0));
  const SoftmaxPolicy policy(init_params(policy_shape, 1));
  const Mlp baseline = init_params(baseline_shape, 2);
  const auto batch = cartpole_batch(policy, 8);
  std::size_t steps = 0;
  for (const auto& t : batch) steps += t.size();
  const BatchContext ctx(batch, policy, &baseline, 0.99);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(kind, ctx, baseline));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * steps));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_CriterionGradient)
    ->Arg(static_cast<int>(CriterionKind::a2c))
    ->Arg(static_cast<int>(CriterionKind::evm))
    ->Arg(static_cast<int>(CriterionKind::evv));

void BM_BatchContext(benchmark::State& state) {
  const SoftmaxPolicy policy(init_params(policy_shape, 1));
  const Mlp baseline = init_params(baseline_shape, 2);
  const auto batch = cartpole_batch(policy, 8);
  const auto mode = state.range(0) ? ScoreMode::cached : ScoreMode::streamed;
  for (auto _ : state) benchmark::DoNotOptimize(BatchContext(batch, policy, &baseline, 0.99, mode));
  state.SetLabel(state.range(0) ? "cached" : "streamed");
}
BENCHMARK(BM_BatchContext)->Arg(0)->Arg(1);

void BM_TrainEpoch(benchmark::State& state) {
  TrainConfig cfg;
  cfg.criterion = static_cast<CriterionKind>(state.range(0));
  TrainState s = initial_state(cfg);
  for (auto _ : state) s = train_epoch(s, cfg).first;
  state.SetLabel(std::string(to_string(cfg.criterion)));
}
BENCHMARK(BM_TrainEpoch)
    ->Arg(static_cast<int>(CriterionKind::a2c))
    ->Arg(static_cast<int>(CriterionKind::evm))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
