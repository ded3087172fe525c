#include "pcp/trainer.hpp"

#include <fstream>
#include <iostream>

#include "pcp/errors.hpp"
#include "pcp/plot.hpp"

namespace pcp {

namespace fs = std::filesystem;

namespace {

AdamSnapshot snapshot(const nn::Adam& adam) { return {adam.steps(), adam.first_moment(), adam.second_moment()}; }

void restore(nn::Adam& adam, const AdamSnapshot& s) { adam.restore(s.steps, s.m, s.v); }

std::array<CrossingPredictor*, 2> predictor_ptrs(std::array<AgentLearner, 2>& agents) {
  std::array<CrossingPredictor*, 2> out{};
  for (int i = 0; i < kNumAgents; ++i) out[i] = agents[i].predictor ? &*agents[i].predictor : nullptr;
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("cannot write " + path.string());
  os << text;
}

MetricsTable truncated(MetricsTable t, int iteration) {
  std::erase_if(t.rows, [&](const std::vector<double>& r) { return r[0] > iteration; });
  return t;
}

}  // namespace

RolloutSpec rollout_spec(const RunConfig& config, std::uint64_t seed) {
  RolloutSpec spec;
  spec.env = config.env;
  spec.env.seed = seed;
  spec.mode = config.mode;
  spec.intrinsic_scale = config.intrinsic_scale;
  spec.mi_alpha = config.mi_alpha;
  spec.curiosity = config.curiosity;
  spec.num_envs = config.ppo.num_parallel_envs;
  spec.steps = config.ppo.steps_per_iteration;
  return spec;
}

Trainer::Trainer(RunConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed), rng_(seed) {
  config_.validate();
  config_.env.seed = seed;
  const nn::AdamConfig adam{config_.ppo.learning_rate};
  for (auto& agent : agents_) {
    agent.policy = ActorCritic(config_.ppo.hidden, rng_.next_u64());
    agent.optimizer = nn::Adam(agent.policy.params().size(), adam);
  }
  if (traits(config_.mode).curiosity) {
    for (auto& agent : agents_) agent.predictor.emplace(config_.predictor, rng_.next_u64());
  }
}

Trainer Trainer::from_checkpoint(const Checkpoint& ck) {
  RunConfig config = run_config_from_json(nlohmann::json::parse(ck.config_json));
  Trainer t(config, ck.seed);
  t.iteration_ = static_cast<int>(ck.iteration);
  t.rng_.deserialize(ck.rng_state);
  for (int i = 0; i < kNumAgents; ++i) {
    const AgentCheckpoint& a = ck.agents[i];
    AgentLearner& learner = t.agents_[i];
    if (a.policy.size() != learner.policy.params().size()) {
      throw RuntimeFailure("checkpoint policy size does not match its config");
    }
    learner.policy.params() = a.policy;
    restore(learner.optimizer, a.policy_optimizer);
    if (a.has_predictor != learner.predictor.has_value()) {
      throw RuntimeFailure("checkpoint predictor presence does not match its reward mode");
    }
    if (learner.predictor) {
      learner.predictor->model.params() = a.predictor;
      restore(learner.predictor->optimizer, a.predictor_optimizer);
      learner.predictor->rng.deserialize(a.predictor_rng);
      learner.predictor->dataset.clear();
      for (const auto& ep : a.dataset) learner.predictor->dataset.add_episode(ep);
    }
  }
  if (ck.chunk_buffers.size() % 4 != 0) throw RuntimeFailure("checkpoint chunk buffers are not per env slot");
  t.trackers_.clear();
  for (std::size_t e = 0; e < ck.chunk_buffers.size() / 4; ++e) {
    std::array<AgentRewardTracker, 2> pair{AgentRewardTracker(config.mode, config.mi_alpha),
                                           AgentRewardTracker(config.mode, config.mi_alpha)};
    for (int i = 0; i < kNumAgents; ++i) {
      InteractionHistory& h = pair[i].history();
      for (const Chunk& c : ck.chunk_buffers[4 * e + 2 * i]) h.impress_buffer.push(c);
      for (const Chunk& c : ck.chunk_buffers[4 * e + 2 * i + 1]) h.influence_buffer.push(c);
    }
    t.trackers_.push_back(std::move(pair));
  }
  return t;
}

IterationMetrics Trainer::run_iteration() {
  const RolloutSpec spec = rollout_spec(config_, seed_);
  RolloutResult rr = collect_rollouts(spec, {&agents_[0].policy, &agents_[1].policy}, predictor_ptrs(agents_), rng_, &trackers_);
  IterationMetrics m = summarize_iteration(iteration_ + 1, rr.traces);
  for (int i = 0; i < kNumAgents; ++i) {
    m.ppo[i] = ppo_update(agents_[i].policy, agents_[i].optimizer, rr.batches[i], config_.ppo, rng_);
  }
  if (traits(config_.mode).curiosity) {
    for (auto& agent : agents_) m.predictor_loss += 0.5 * agent.predictor->train().mean_loss;
  }
  ++iteration_;
  last_traces_ = std::move(rr.traces);
  return m;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  ck.config_json = to_json(config_).dump();
  ck.seed = seed_;
  ck.iteration = iteration_;
  ck.rng_state = rng_.serialize();
  for (int i = 0; i < kNumAgents; ++i) {
    const AgentLearner& learner = agents_[i];
    AgentCheckpoint& a = ck.agents[i];
    a.policy = learner.policy.params();
    a.policy_optimizer = snapshot(learner.optimizer);
    a.has_predictor = learner.predictor.has_value();
    if (learner.predictor) {
      a.predictor = learner.predictor->model.params();
      a.predictor_optimizer = snapshot(learner.predictor->optimizer);
      a.predictor_rng = learner.predictor->rng.serialize();
      a.dataset.assign(learner.predictor->dataset.episodes().begin(), learner.predictor->dataset.episodes().end());
    }
  }
  for (const auto& pair : trackers_) {
    for (const AgentRewardTracker& tracker : pair) {
      const auto& impress = tracker.history().impress_buffer.chunks();
      const auto& influence = tracker.history().influence_buffer.chunks();
      ck.chunk_buffers.emplace_back(impress.begin(), impress.end());
      ck.chunk_buffers.emplace_back(influence.begin(), influence.end());
    }
  }
  return ck;
}

TrainResult train(const RunConfig& config, std::uint64_t seed, const TrainOptions& options) {
  const std::string run_id = options.run_id.empty() ? config.name + "_seed" + std::to_string(seed) : options.run_id;
  const fs::path dir = options.run_dir;
  auto io_context = [&](int iteration, const std::exception& e) {
    return RuntimeFailure("run " + run_id + ", iteration " + std::to_string(iteration) + ": " + e.what());
  };

  std::optional<Trainer> trainer;
  TrainResult result;
  try {
    fs::create_directories(dir / "checkpoints");
    if (options.resume_from) {
      trainer.emplace(Trainer::from_checkpoint(load_checkpoint(*options.resume_from)));
      const int done = trainer->iteration();
      result.metrics = fs::exists(dir / "metrics.csv") ? truncated(read_csv(dir / "metrics.csv"), done)
                                                       : metrics_table(run_id, {});
      result.rewards = fs::exists(dir / "rewards.csv") ? truncated(read_csv(dir / "rewards.csv"), done)
                                                       : rewards_table(run_id, {});
    } else {
      trainer.emplace(config, seed);
      result.metrics = metrics_table(run_id, {});
      result.rewards = rewards_table(run_id, {});
    }
    result.metrics.run_id = run_id;
    result.rewards.run_id = run_id;
    RunConfig echo = trainer->config();
    echo.seeds = {trainer->seed()};
    echo.ppo.iterations = config.ppo.iterations;
    write_text(dir / "config.json", to_json(echo).dump(2) + "\n");
    if (!options.resume_from) {
      result.last_checkpoint = dir / "checkpoints" / (artifact_stem(run_id, 0) + ".ckpt");
      save_checkpoint(result.last_checkpoint, trainer->checkpoint());
    }
  } catch (const RuntimeFailure& e) {
    throw io_context(trainer ? trainer->iteration() : 0, e);
  } catch (const fs::filesystem_error& e) {
    throw io_context(trainer ? trainer->iteration() : 0, e);
  }

  const RunConfig& cfg = trainer->config();
  auto flush_tables = [&] {
    write_csv(dir / "metrics.csv", result.metrics);
    write_csv(dir / "rewards.csv", result.rewards);
  };

  while (trainer->iteration() < config.ppo.iterations) {
    const IterationMetrics m = trainer->run_iteration();
    const int it = trainer->iteration();
    result.metrics.rows.push_back(metrics_table(run_id, std::span(&m, 1)).rows.front());
    result.rewards.rows.push_back(rewards_table(run_id, std::span(&m, 1)).rows.front());
    if (options.on_iteration) options.on_iteration(m);

    const bool scheduled = cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0;
    if (scheduled || it == config.ppo.iterations) {
      try {
        const std::string stem = artifact_stem(run_id, it);
        result.last_checkpoint = dir / "checkpoints" / (stem + ".ckpt");
        save_checkpoint(result.last_checkpoint, trainer->checkpoint());
        flush_tables();
        const auto& traces = trainer->last_traces();
        const std::size_t k = std::min<std::size_t>(traces.size(), static_cast<std::size_t>(cfg.trajectory_episodes));
        if (k > 0) {
          fs::create_directories(dir / "traces");
          for (std::size_t e = 0; e < k; ++e) {
            write_trace_csv((dir / "traces" / (stem + "_ep" + std::to_string(e) + ".csv")).string(), traces[e].rows);
          }
          if (options.write_plots) {
            plot::write_trajectory_plot(dir / "plots" / (stem + "_trajectories.svg"), stem,
                                        std::span(traces.data(), k));
          }
        }
      } catch (const std::exception& e) {
        throw io_context(it, e);
      }
    }
  }

  try {
    flush_tables();
    result.summary = summarize_run(result.metrics);
    result.summary.mode = std::string(to_string(cfg.mode));
    result.summary.seed = trainer->seed();
    write_summary_json(dir / "summary.json", result.summary);
    if (options.write_plots) plot::write_training_plots(dir / "plots", run_id, result.metrics);
  } catch (const std::exception& e) {
    throw io_context(trainer->iteration(), e);
  }
  return result;
}

LoadedModels load_models(const Checkpoint& ck) {
  const Trainer t = Trainer::from_checkpoint(ck);
  LoadedModels m;
  m.config = t.config();
  m.seed = ck.seed;
  m.iteration = ck.iteration;
  for (int i = 0; i < kNumAgents; ++i) {
    m.policies[i] = t.agents()[i].policy;
    m.predictors[i] = t.agents()[i].predictor;
  }
  return m;
}

EvaluationReport evaluate(const LoadedModels& models, int episodes, std::uint64_t seed, bool greedy) {
  EvaluationReport report;
  if (episodes <= 0) return report;
  RolloutSpec spec = rollout_spec(models.config, seed);
  spec.num_envs = 1;
  spec.steps = episodes * models.config.env.episode_length;
  spec.greedy = greedy;
  // predictors are used for the curiosity term only; copies keep the models frozen
  std::array<std::optional<CrossingPredictor>, 2> predictors = models.predictors;
  std::array<CrossingPredictor*, 2> ptrs{};
  for (int i = 0; i < kNumAgents; ++i) ptrs[i] = predictors[i] ? &*predictors[i] : nullptr;
  Rng rng(seed);
  RolloutResult rr = collect_rollouts(spec, {&models.policies[0], &models.policies[1]}, ptrs, rng);

  const IterationMetrics m = summarize_iteration(0, rr.traces);
  report.episodes = m.episodes;
  report.mean_return = m.mean_return;
  report.extrinsic_agent0 = m.mean_breakdown[0].extrinsic;
  report.self_other = m.self_other;
  report.self_shadow = m.self_shadow;
  report.self_stationary = m.self_stationary;
  for (const EpisodeTrace& tr : rr.traces) {
    const auto counts = count_crossings(tr.rows);
    for (int i = 0; i < kNumAgents; ++i) {
      report.per_agent_proportions[i][0] += counts[i].proportion_other() / episodes;
      report.per_agent_proportions[i][1] += counts[i].proportion_shadow() / episodes;
      report.per_agent_proportions[i][2] += counts[i].proportion_stationary() / episodes;
    }
  }
  report.traces = std::move(rr.traces);
  return report;
}

nlohmann::ordered_json to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["episodes"] = r.episodes;
  j["mean_return"] = {r.mean_return[0], r.mean_return[1]};
  j["extrinsic_agent0"] = r.extrinsic_agent0;
  j["proportions"] = {{"self_other", r.self_other},
                      {"self_shadow", r.self_shadow},
                      {"self_stationary", r.self_stationary}};
  j["per_agent"] = nlohmann::ordered_json::array();
  for (const auto& p : r.per_agent_proportions) {
    j["per_agent"].push_back({{"self_other", p[0]}, {"self_shadow", p[1]}, {"self_stationary", p[2]}});
  }
  return j;
}

}  // namespace pcp
