#pragma once

// PPO for the two recurrent actor-critics: rollout collection, GAE and the
// clipped-surrogate update. Each rollout sequence is one full episode.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/nn/adam.hpp"
#include "pcp/policy.hpp"
#include "pcp/predictor.hpp"
#include "pcp/rewards.hpp"
#include "pcp/trace.hpp"

namespace pcp {

struct PPOConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double entropy_coeff = 0.01;
  double value_coeff = 0.5;
  double learning_rate = 1e-3;
  int epochs_per_batch = 4;
  int steps_per_iteration = 4000;
  int iterations = 2000;
  int num_parallel_envs = 8;
  int minibatch_episodes = 2;
  double max_grad_norm = 0.5;
  int hidden = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One agent's view of one episode.
struct EpisodeRollout {
  std::vector<std::array<double, kObservationSize>> observations;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<RewardBreakdown> breakdowns;
  nn::Vec initial_h;
  nn::Vec initial_c;

  std::size_t length() const { return actions.size(); }
};

struct RolloutBatch {
  std::vector<EpisodeRollout> episodes;

  std::size_t steps() const;
};

struct RolloutSpec {
  EnvConfig env;
  RewardMode mode = RewardMode::InfluenceImpressionability;
  double intrinsic_scale = 1.0;
  double mi_alpha = 1.0;
  CuriosityConfig curiosity;
  int num_envs = 8;
  int steps = 4000;
  bool greedy = false;
};

using RewardTrackers = std::vector<std::array<AgentRewardTracker, 2>>;

struct RolloutResult {
  std::array<RolloutBatch, 2> batches;
  std::vector<EpisodeTrace> traces;
};

/// Runs both policies in `spec.num_envs` lockstepped environments until
/// `spec.steps` steps have been taken. In curiosity mode each finished
/// episode is appended to the matching predictor's dataset.
///
/// `trackers`, when given, holds one tracker pair per env slot and carries the
/// MI chunk buffers across episodes and calls; step records restart with every
/// episode. Without it every episode starts from empty buffers.
RolloutResult collect_rollouts(const RolloutSpec& spec, const std::array<const ActorCritic*, 2>& policies,
                               const std::array<CrossingPredictor*, 2>& predictors, Rng& rng,
                               RewardTrackers* trackers = nullptr);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> value_targets;
};

/// Episode-local GAE with a zero bootstrap after the final step.
GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values, double gamma,
                         double lambda);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double kl = 0.0;
  double grad_norm = 0.0;
  int updates = 0;
};

/// Time-major minibatch of whole episodes; column b of every matrix is episode b.
struct PpoMinibatch {
  std::vector<nn::Mat> observations;  // T entries of kObservationSize x B
  Eigen::MatrixXi actions;            // T x B
  nn::Mat old_log_probs;              // T x B
  nn::Mat advantages;                 // T x B, already normalized
  nn::Mat value_targets;              // T x B
  nn::Mat mask;                       // T x B
  nn::LstmState initial;
};

PpoMinibatch make_minibatch(const RolloutBatch& batch, std::span<const std::size_t> episode_indices,
                            std::span<const std::vector<double>> advantages,
                            std::span<const std::vector<double>> value_targets);

/// Clipped-surrogate loss (to minimize) with value and entropy terms.
/// Fills `grad` with dloss/dparams when given.
double ppo_loss(const ActorCritic& policy, const PpoMinibatch& mb, const PPOConfig& config, nn::Vec* grad,
                PpoStats* stats = nullptr);

/// Advantages are normalized per batch; `epochs_per_batch` shuffled passes
/// over episode minibatches. Non-finite losses raise RuntimeFailure.
PpoStats ppo_update(ActorCritic& policy, nn::Adam& optimizer, const RolloutBatch& batch, const PPOConfig& config,
                    Rng& rng);

}  // namespace pcp
