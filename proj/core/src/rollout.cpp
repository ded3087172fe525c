#include <cmath>
#include <string>

#include "pcp/errors.hpp"
#include "pcp/ppo.hpp"

namespace pcp {

namespace {

double log_prob(const Eigen::Ref<const nn::Vec>& logits, int action) {
  const double m = logits.maxCoeff();
  return logits(action) - m - std::log((logits.array() - m).exp().sum());
}

}  // namespace

RolloutResult collect_rollouts(const RolloutSpec& spec, const std::array<const ActorCritic*, 2>& policies,
                               const std::array<CrossingPredictor*, 2>& predictors, Rng& rng,
                               RewardTrackers* persistent) {
  spec.env.validate();
  const ModeTraits mode = traits(spec.mode);
  const int T = spec.env.episode_length;
  const int E = spec.num_envs;
  if (E <= 0) throw ConfigError("collect_rollouts: num_envs > 0");
  if (spec.steps < 0 || spec.steps % (T * E) != 0) {
    throw ConfigError("collect_rollouts: steps (" + std::to_string(spec.steps) +
                      ") must be a multiple of episode_length * num_envs (" + std::to_string(T * E) + ")");
  }
  for (const auto* p : policies) {
    if (p == nullptr) throw ConfigError("collect_rollouts: both policies are required");
  }
  if (mode.curiosity) {
    for (const auto* p : predictors) {
      if (p == nullptr) throw ConfigError("collect_rollouts: curiosity mode requires both predictors");
    }
  }
  if (mode.extrinsic != spec.env.extrinsic_task) {
    throw ConfigError("collect_rollouts: reward mode and env extrinsic_task disagree");
  }

  RewardTrackers local;
  RewardTrackers& trackers = persistent ? *persistent : local;
  if (trackers.size() != static_cast<std::size_t>(E)) {
    trackers.assign(E, {AgentRewardTracker(spec.mode, spec.mi_alpha), AgentRewardTracker(spec.mode, spec.mi_alpha)});
  }

  RolloutResult result;
  const int rounds = spec.steps / (T * E);
  for (int round = 0; round < rounds; ++round) {
    std::vector<WorldState> states(E);
    std::vector<ObservationPair> obs(E);
    std::vector<std::array<double, 2>> rewards_prev(E, {0.0, 0.0});
    std::vector<EpisodeTrace> traces(E);
    std::vector<std::array<EpisodeRollout, 2>> episodes(E);
    std::vector<std::array<std::vector<AgentObservation>, 2>> obs_history(E);

    for (int e = 0; e < E; ++e) {
      const std::uint64_t seed = rng.next_u64();
      ResetResult r = reset(spec.env, seed);
      states[e] = std::move(r.state);
      obs[e] = r.observations;
      traces[e].seed = seed;
      if (persistent) {
        for (auto& t : trackers[e]) t.begin_episode();
      } else {
        for (auto& t : trackers[e]) t.reset();
      }
      for (int i = 0; i < kNumAgents; ++i) {
        auto& ep = episodes[e][i];
        ep.initial_h = nn::Vec::Zero(policies[i]->hidden());
        ep.initial_c = nn::Vec::Zero(policies[i]->hidden());
        ep.observations.reserve(T);
        ep.actions.reserve(T);
        ep.log_probs.reserve(T);
        ep.values.reserve(T);
        ep.rewards.reserve(T);
        ep.breakdowns.reserve(T);
        if (mode.curiosity) obs_history[e][i].push_back(obs[e][i]);
      }
      traces[e].rows.reserve(T);
    }

    std::array<nn::LstmState, 2> policy_state{policies[0]->initial_state(E), policies[1]->initial_state(E)};
    std::array<nn::LstmState, 2> predictor_state;
    if (mode.curiosity) {
      for (int i = 0; i < kNumAgents; ++i) predictor_state[i] = predictors[i]->model.initial_state(E);
    }

    nn::Mat x(kObservationSize, E);
    for (int t = 0; t < T; ++t) {
      std::vector<ActionPair> actions(E);
      std::array<nn::Vec, 2> predicted;
      for (int i = 0; i < kNumAgents; ++i) {
        for (int e = 0; e < E; ++e) {
          const auto a = obs[e][i].to_array();
          for (int k = 0; k < kObservationSize; ++k) x(k, e) = a[k];
        }
        const PolicyOutput out = policies[i]->step(x, policy_state[i]);
        for (int e = 0; e < E; ++e) {
          const auto probs = softmax(out.logits.col(e));
          const int a = spec.greedy ? greedy_action(probs) : sample_action(probs, rng);
          actions[e][i] = action_from_index(a);
          auto& ep = episodes[e][i];
          ep.observations.push_back(obs[e][i].to_array());
          ep.actions.push_back(a);
          ep.log_probs.push_back(log_prob(out.logits.col(e), a));
          ep.values.push_back(out.values(e));
        }
        if (mode.curiosity) predicted[i] = predictors[i]->model.predict_batch(x, predictor_state[i]);
      }

      for (int e = 0; e < E; ++e) {
        StepResult sr = step(states[e], actions[e], rewards_prev[e], spec.env);
        TraceRow row;
        row.tick = sr.state.tick;
        row.positions = sr.state.positions;
        row.applied = sr.applied;
        row.signal_bit = spec.env.extrinsic_task ? sr.state.signal_bit : 0;
        row.crossings = sr.crossings;
        for (int i = 0; i < kNumAgents; ++i) {
          const int bit = sr.crossings[i].crossing_bit();
          RewardBreakdown b = trackers[e][i].record(sr.applied[i], bit);
          if (mode.curiosity) {
            const Prediction pred = make_prediction(predicted[i](e));
            b.curiosity = curiosity_reward(compute_error(pred, bit), pred.confidence, spec.curiosity);
          }
          if (mode.extrinsic && i == 0) b.extrinsic = extrinsic_reward(sr.state.signal_bit, sr.state.positions[1]);
          b.total = compose_total(spec.mode, b, spec.intrinsic_scale);
          row.rewards[i] = b;
          rewards_prev[e][i] = b.total;
          episodes[e][i].rewards.push_back(b.total);
          episodes[e][i].breakdowns.push_back(b);
          if (mode.curiosity) obs_history[e][i].push_back(sr.observations[i]);
        }
        traces[e].rows.push_back(row);
        states[e] = std::move(sr.state);
        obs[e] = sr.observations;
      }
    }

    for (int e = 0; e < E; ++e) {
      for (int i = 0; i < kNumAgents; ++i) {
        result.batches[i].episodes.push_back(std::move(episodes[e][i]));
        if (mode.curiosity) predictors[i]->dataset.add_episode(obs_history[e][i]);
      }
      result.traces.push_back(std::move(traces[e]));
    }
  }
  return result;
}

}  // namespace pcp
