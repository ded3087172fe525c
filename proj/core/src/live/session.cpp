#include "pcp/live/session.hpp"

#include <algorithm>
#include <cmath>

#include "pcp/errors.hpp"
#include "pcp/metrics.hpp"

namespace pcp::live {

void SessionOptions::validate() const {
  if (human_slot != 0 && human_slot != 1) throw ConfigError("session: human_slot must be 0 or 1");
  if (!(tick_hz > 0.0) || !std::isfinite(tick_hz)) throw ConfigError("session: tick_hz > 0");
  if (episode_length < 0) throw ConfigError("session: episode_length >= 0");
  if (mark_tolerance < 0) throw ConfigError("session: mark_tolerance >= 0");
}

LiveSession::LiveSession(std::string id, std::shared_ptr<const LoadedModels> models, const SessionOptions& options,
                         std::uint64_t seed)
    : id_(std::move(id)),
      models_(std::move(models)),
      options_(options),
      seed_(seed),
      rng_(seed),
      trackers_{AgentRewardTracker(RewardMode::Curiosity, 1.0), AgentRewardTracker(RewardMode::Curiosity, 1.0)} {
  if (!models_) throw ConfigError("session: models are required");
  options_.validate();
  const RunConfig& cfg = models_->config;
  env_ = cfg.env;
  if (options_.episode_length > 0) env_.episode_length = options_.episode_length;
  env_.seed = seed;
  env_.validate();

  ResetResult r = reset(env_, seed);
  state_ = std::move(r.state);
  obs_ = r.observations;
  machine_state_ = models_->policies[machine_slot()].initial_state();
  trackers_ = {AgentRewardTracker(cfg.mode, cfg.mi_alpha), AgentRewardTracker(cfg.mode, cfg.mi_alpha)};
  if (traits(cfg.mode).curiosity) {
    for (int i = 0; i < kNumAgents; ++i) {
      if (!models_->predictors[i]) throw ConfigError("session: curiosity checkpoint without predictors");
      predictors_[i] = models_->predictors[i];
      predictor_state_[i] = predictors_[i]->model.initial_state();
    }
  }
  trace_.reserve(static_cast<std::size_t>(std::min(env_.episode_length, 100000)));
}

std::chrono::nanoseconds LiveSession::period() const {
  return std::chrono::nanoseconds(static_cast<std::int64_t>(std::llround(1e9 / options_.tick_hz)));
}

ConfigMessage LiveSession::config_message(bool resumed) const {
  ConfigMessage m;
  m.session = id_;
  m.slot = options_.human_slot;
  m.tick_hz = options_.tick_hz;
  m.episode_length = env_.episode_length;
  m.step_size = env_.step_size;
  m.crossing_threshold = env_.crossing_threshold;
  m.mark_tolerance = options_.mark_tolerance;
  m.resumed = resumed;
  return m;
}

TickMessage LiveSession::advance_tick() {
  if (ended_) throw StateError("session " + id_ + " has ended");
  if (finished()) throw StateError("session " + id_ + " reached its episode length");
  const RunConfig& cfg = models_->config;
  const int machine = machine_slot();
  const int human = options_.human_slot;

  nn::Mat x(kObservationSize, 1);
  const auto mo = obs_[machine].to_array();
  for (int k = 0; k < kObservationSize; ++k) x(k, 0) = mo[k];
  const PolicyOutput out = models_->policies[machine].step(x, machine_state_);
  const auto probs = softmax(out.logits.col(0));
  ActionPair actions{};
  actions[machine] = action_from_index(options_.greedy ? greedy_action(probs) : sample_action(probs, rng_));
  actions[human] = held_;

  std::array<Prediction, 2> predicted{};
  if (predictors_[0]) {
    for (int i = 0; i < kNumAgents; ++i) predicted[i] = predictors_[i]->model.predict_next(predictor_state_[i], obs_[i]);
  }

  StepResult sr = step(state_, actions, rewards_prev_, env_);
  TraceRow row;
  row.tick = sr.state.tick;
  row.positions = sr.state.positions;
  row.applied = sr.applied;
  row.signal_bit = env_.extrinsic_task ? sr.state.signal_bit : 0;
  row.crossings = sr.crossings;
  const ModeTraits mode = traits(cfg.mode);
  for (int i = 0; i < kNumAgents; ++i) {
    const int bit = sr.crossings[i].crossing_bit();
    RewardBreakdown b = trackers_[i].record(sr.applied[i], bit);
    if (predictors_[i]) b.curiosity = curiosity_reward(compute_error(predicted[i], bit), predicted[i].confidence, cfg.curiosity);
    if (mode.extrinsic && i == 0) b.extrinsic = extrinsic_reward(sr.state.signal_bit, sr.state.positions[1]);
    b.total = compose_total(cfg.mode, b, cfg.intrinsic_scale);
    row.rewards[i] = b;
    rewards_prev_[i] = b.total;
  }
  trace_.push_back(row);
  state_ = std::move(sr.state);
  obs_ = sr.observations;
  return TickMessage{state_.tick, state_.positions[human], sr.crossings[human].crossing_bit()};
}

MarkAckMessage LiveSession::record_mark(int tick) {
  if (ended_) throw StateError("session " + id_ + " has ended");
  if (tick < 0 || tick > state_.tick) {
    throw StateError("mark tick " + std::to_string(tick) + " outside 0.." + std::to_string(state_.tick));
  }
  marks_.push_back(tick);
  return MarkAckMessage{tick, static_cast<int>(marks_.size()) - 1};
}

SessionSummaryMessage LiveSession::end_session(const std::filesystem::path& trace_dir) {
  if (ended_) throw StateError("session " + id_ + " has already ended");
  ended_ = true;
  const int human = options_.human_slot;

  SessionSummaryMessage s;
  s.session = id_;
  s.seed = seed_;
  s.ticks = state_.tick;
  s.marks = static_cast<int>(marks_.size());
  for (int t : marks_) {
    // trace_[k] holds tick k + 1
    bool hit = false;
    for (int u = std::max(1, t - options_.mark_tolerance); u <= std::min(s.ticks, t + options_.mark_tolerance); ++u) {
      hit = hit || trace_[static_cast<std::size_t>(u - 1)].crossings[human].crossed_other;
    }
    s.mark_log.push_back({t, hit});
    s.hits += hit ? 1 : 0;
  }
  if (s.marks > 0) s.precision = static_cast<double>(s.hits) / s.marks;
  const CrossingCounts counts = count_crossings(trace_)[human];
  s.self_other = counts.proportion_other();
  s.self_shadow = counts.proportion_shadow();
  s.self_stationary = counts.proportion_stationary();
  s.machine_positions.reserve(trace_.size());
  for (const TraceRow& r : trace_) s.machine_positions.push_back(r.positions[machine_slot()]);
  if (!trace_dir.empty()) {
    std::filesystem::create_directories(trace_dir);
    const std::filesystem::path file = trace_dir / (id_ + ".csv");
    write_trace_csv(file.string(), trace_);
    s.trace_file = file.filename().string();
  }
  return s;
}

}  // namespace pcp::live
