#include <benchmark/benchmark.h>

#include <memory>

#include "pcp/env.hpp"
#include "pcp/live/session.hpp"
#include "pcp/mutual_information.hpp"
#include "pcp/policy.hpp"
#include "pcp/ppo.hpp"
#include "pcp/predictor.hpp"
#include "pcp/run_config.hpp"
#include "pcp/trainer.hpp"

namespace {

void BM_EnvStep(benchmark::State& state) {
  pcp::EnvConfig cfg;
  cfg.episode_length = 1 << 30;
  pcp::WorldState s = pcp::reset(cfg, 1).state;
  pcp::Rng rng(2);
  for (auto _ : state) {
    const pcp::ActionPair a{pcp::action_from_index(static_cast<int>(rng.below(3))),
                            pcp::action_from_index(static_cast<int>(rng.below(3)))};
    s = pcp::step(s, a, {0.0, 0.0}, cfg).state;
    benchmark::DoNotOptimize(s.positions);
  }
}
BENCHMARK(BM_EnvStep);

void BM_WindowedMiDelta(benchmark::State& state) {
  pcp::ChunkBuffer buffer(1.0);
  pcp::Rng rng(3);
  for (int i = 0; i < pcp::ChunkBuffer::kCapacity; ++i) {
    buffer.push({static_cast<pcp::TransitionCategory>(rng.below(3)), static_cast<pcp::TransitionCategory>(rng.below(3)),
                 pcp::ChunkDirection::PassiveThenActive});
  }
  for (auto _ : state) benchmark::DoNotOptimize(pcp::windowed_mi_delta(buffer));
}
BENCHMARK(BM_WindowedMiDelta);

void BM_PolicyStep(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const pcp::ActorCritic policy(64, 4);
  pcp::nn::LstmState h = policy.initial_state(batch);
  const pcp::nn::Mat x = pcp::nn::Mat::Random(pcp::kObservationSize, batch);
  for (auto _ : state) benchmark::DoNotOptimize(policy.step(x, h));
}
BENCHMARK(BM_PolicyStep)->Arg(1)->Arg(8);

void BM_PolicyForwardBackward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const int T = 100;
  const pcp::ActorCritic policy(64, 5);
  std::vector<pcp::nn::Mat> xs(T, pcp::nn::Mat::Random(pcp::kObservationSize, batch));
  std::vector<pcp::nn::Mat> dl(T, pcp::nn::Mat::Constant(pcp::kNumActions, batch, 0.01));
  std::vector<pcp::nn::Mat> dv(T, pcp::nn::Mat::Constant(1, batch, 0.01));
  pcp::PolicySequencePass pass;
  pcp::nn::Vec grad = pcp::nn::Vec::Zero(policy.params().size());
  for (auto _ : state) {
    policy.forward_sequence(xs, policy.initial_state(batch), pass);
    policy.backward_sequence(pass, dl, dv, grad);
  }
  state.SetItemsProcessed(state.iterations() * T * batch);
}
BENCHMARK(BM_PolicyForwardBackward)->Arg(10);

void BM_PredictorLossAndGrad(benchmark::State& state) {
  const pcp::PredictorModel model(32, 6);
  pcp::Rng rng(7);
  std::vector<pcp::TrajectoryEpisode> episodes(20);
  for (auto& ep : episodes) {
    for (int t = 0; t < 100; ++t) {
      ep.observations.push_back({rng.uniform(), static_cast<double>(rng.below(2)), 0.5, 0.0, 0.0});
      ep.labels.push_back(static_cast<std::uint8_t>(rng.below(2)));
    }
  }
  std::vector<const pcp::TrajectoryEpisode*> ptrs;
  for (const auto& ep : episodes) ptrs.push_back(&ep);
  pcp::nn::Vec grad(model.params().size());
  for (auto _ : state) {
    grad.setZero();
    benchmark::DoNotOptimize(model.loss_and_grad(ptrs, &grad));
  }
}
BENCHMARK(BM_PredictorLossAndGrad);

void BM_CollectRound(benchmark::State& state) {
  const pcp::RunConfig cfg = pcp::default_run_config(pcp::RewardMode::InfluenceImpressionability);
  pcp::RolloutSpec spec = pcp::rollout_spec(cfg, 0);
  spec.steps = spec.env.episode_length * spec.num_envs;
  const pcp::ActorCritic a(64, 8), b(64, 9);
  pcp::Rng rng(10);
  for (auto _ : state) benchmark::DoNotOptimize(pcp::collect_rollouts(spec, {&a, &b}, {nullptr, nullptr}, rng));
  state.SetItemsProcessed(state.iterations() * spec.steps);
}
BENCHMARK(BM_CollectRound)->Unit(benchmark::kMillisecond);

void BM_LiveAdvanceTick(benchmark::State& state) {
  const pcp::Trainer trainer(pcp::default_run_config(pcp::RewardMode::Curiosity), 11);
  auto models = std::make_shared<const pcp::LoadedModels>(pcp::load_models(trainer.checkpoint()));
  pcp::live::SessionOptions opts;
  opts.episode_length = 1 << 30;
  pcp::live::LiveSession session("bench", models, opts, 12);
  session.set_input(pcp::Action::Right);
  for (auto _ : state) benchmark::DoNotOptimize(session.advance_tick());
}
BENCHMARK(BM_LiveAdvanceTick)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
