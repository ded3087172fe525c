#pragma once

// Joint training of both agents, checkpointing and frozen-policy evaluation.
//
// Run directory layout:
//   config.json    fully resolved configuration (enough to reproduce the run)
//   metrics.csv    per-iteration metrics (see metrics.hpp)
//   rewards.csv    per-iteration per-agent reward breakdown
//   summary.json   tail statistics
//   checkpoints/   <run_id>_iterNNNNNN.ckpt
//   plots/         training curves and trajectory panels
//   traces/        sampled episode traces (CSV, see trace.hpp)

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcp/checkpoint.hpp"
#include "pcp/metrics.hpp"
#include "pcp/nn/adam.hpp"
#include "pcp/policy.hpp"
#include "pcp/ppo.hpp"
#include "pcp/predictor.hpp"
#include "pcp/run_config.hpp"

namespace pcp {

struct AgentLearner {
  ActorCritic policy;
  nn::Adam optimizer;
  std::optional<CrossingPredictor> predictor;
};

RolloutSpec rollout_spec(const RunConfig& config, std::uint64_t seed);

class Trainer {
 public:
  Trainer(RunConfig config, std::uint64_t seed);

  /// Restores every piece of state needed to continue bit-identically.
  static Trainer from_checkpoint(const Checkpoint& checkpoint);

  /// Collect, update both agents, then (curiosity mode) fit the predictors.
  IterationMetrics run_iteration();

  Checkpoint checkpoint() const;

  int iteration() const { return iteration_; }
  std::uint64_t seed() const { return seed_; }
  const RunConfig& config() const { return config_; }
  const std::array<AgentLearner, 2>& agents() const { return agents_; }
  std::array<AgentLearner, 2>& agents() { return agents_; }
  /// Episode traces of the most recent iteration.
  const std::vector<EpisodeTrace>& last_traces() const { return last_traces_; }
  const RewardTrackers& reward_trackers() const { return trackers_; }

 private:
  RunConfig config_;
  std::uint64_t seed_;
  int iteration_ = 0;
  Rng rng_;
  std::array<AgentLearner, 2> agents_;
  RewardTrackers trackers_;
  std::vector<EpisodeTrace> last_traces_;
};

struct TrainOptions {
  std::filesystem::path run_dir;
  std::string run_id;
  std::optional<std::filesystem::path> resume_from;
  bool write_plots = true;
  std::function<void(const IterationMetrics&)> on_iteration;
};

struct TrainResult {
  MetricsTable metrics;
  MetricsTable rewards;
  RunSummary summary;
  std::filesystem::path last_checkpoint;
};

/// Trains one seed up to config.ppo.iterations, writing the run directory.
/// I/O failures raise RuntimeFailure naming the run and iteration.
TrainResult train(const RunConfig& config, std::uint64_t seed, const TrainOptions& options);

/// Frozen models reconstructed from a checkpoint.
struct LoadedModels {
  RunConfig config;
  std::uint64_t seed = 0;
  std::int64_t iteration = 0;
  std::array<ActorCritic, 2> policies;
  std::array<std::optional<CrossingPredictor>, 2> predictors;
};

LoadedModels load_models(const Checkpoint& checkpoint);

struct EvaluationReport {
  int episodes = 0;
  std::array<double, 2> mean_return{};
  double extrinsic_agent0 = 0.0;
  double self_other = 0.0;
  double self_shadow = 0.0;
  double self_stationary = 0.0;
  std::array<std::array<double, 3>, 2> per_agent_proportions{};
  std::vector<EpisodeTrace> traces;
};

/// Rollouts with frozen policies; deterministic for a given seed.
EvaluationReport evaluate(const LoadedModels& models, int episodes, std::uint64_t seed, bool greedy = false);

nlohmann::ordered_json to_json(const EvaluationReport& report);

}  // namespace pcp
