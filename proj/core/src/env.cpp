#include "pcp/env.hpp"

#include <cmath>
#include <string>

#include "pcp/errors.hpp"
#include "pcp/rng.hpp"

namespace pcp {

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) {
    throw ConfigError("action index out of range: " + std::to_string(index));
  }
  return static_cast<Action>(index);
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::NoOp: return "noop";
    case Action::Left: return "left";
    case Action::Right: return "right";
  }
  return "?";
}

void EnvConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("EnvConfig: " + what); };
  if (line_length != 1.0) fail("line_length must be 1.0");
  if (!(step_size > 0.0 && step_size < line_length)) fail("0 < step_size < line_length");
  if (!(crossing_threshold > 0.0 && crossing_threshold < 0.5)) fail("0 < crossing_threshold < 0.5");
  if (crossing_threshold < step_size) fail("crossing_threshold >= step_size");
  for (double p : object_positions) {
    if (!(p >= 0.0 && p < 1.0)) fail("object_positions in [0, 1)");
  }
  if (!std::isfinite(shadow_offset)) fail("shadow_offset finite");
  if (episode_length <= 0) fail("episode_length > 0");
  if (action_delay != 0 && action_delay != 2) fail("action_delay in {0, 2}");
}

double wrap_unit(double x) {
  double r = std::fmod(x, 1.0);
  if (r < 0.0) r += 1.0;
  // fmod of a tiny negative plus 1.0 can round up to exactly 1.0
  if (r >= 1.0) r -= 1.0;
  return r;
}

double circular_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::fmin(d, 1.0 - d);
}

double shadow_position(double pos, double offset) { return wrap_unit(pos + offset); }

ResetResult reset(const EnvConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ResetResult out;
  out.state.positions = {rng.uniform(), rng.uniform()};
  out.state.tick = 0;
  for (auto& q : out.state.pending_actions) q.assign(static_cast<std::size_t>(config.action_delay), Action::NoOp);
  out.state.signal_bit = 1;
  if (config.extrinsic_task) out.state.signal_bit = (rng.next_u64() >> 63) ? 1 : -1;
  for (int i = 0; i < kNumAgents; ++i) {
    out.observations[i] = make_observation(out.state, config, i, 0, Action::NoOp, 0.0);
  }
  return out;
}

CrossingPair detect_crossings(const WorldState& state, const EnvConfig& config) {
  CrossingPair out;
  const double th = config.crossing_threshold;
  for (int i = 0; i < kNumAgents; ++i) {
    const int j = 1 - i;
    const double me = state.positions[i];
    const double other = state.positions[j];
    out[i].crossed_other = circular_distance(me, other) <= th;
    out[i].crossed_other_shadow = circular_distance(me, shadow_position(other, config.shadow_offset)) <= th;
    out[i].crossed_own_object = circular_distance(me, config.object_positions[i]) <= th;
  }
  return out;
}

namespace {

double move(double pos, Action a, double step_size) {
  switch (a) {
    case Action::Left: return wrap_unit(pos - step_size);
    case Action::Right: return wrap_unit(pos + step_size);
    case Action::NoOp: break;
  }
  return pos;
}

}  // namespace

StepResult step(const WorldState& state, const ActionPair& actions, const std::array<double, 2>& rewards_prev,
                const EnvConfig& config) {
  if (state.tick >= config.episode_length) {
    throw StateError("step called after episode end (tick " + std::to_string(state.tick) + ")");
  }
  StepResult out;
  out.state = state;
  for (int i = 0; i < kNumAgents; ++i) {
    auto& queue = out.state.pending_actions[i];
    if (queue.size() != static_cast<std::size_t>(config.action_delay)) {
      throw StateError("pending action queue length does not match action_delay");
    }
    queue.push_back(actions[i]);
    out.applied[i] = queue.front();
    queue.erase(queue.begin());
    out.state.positions[i] = move(state.positions[i], out.applied[i], config.step_size);
  }
  out.state.tick = state.tick + 1;
  out.crossings = detect_crossings(out.state, config);
  for (int i = 0; i < kNumAgents; ++i) {
    out.observations[i] =
        make_observation(out.state, config, i, out.crossings[i].crossing_bit(), actions[i], rewards_prev[i]);
  }
  out.done = out.state.tick == config.episode_length;
  return out;
}

double extrinsic_reward(int signal_bit, double pos_agent1) {
  const double top = pos_agent1 >= 0.5 ? 1.0 : -1.0;
  return signal_bit >= 0 ? top : -top;
}

AgentObservation make_observation(const WorldState& state, const EnvConfig& config, int agent, int crossing_bit,
                                  Action submitted, double last_reward) {
  AgentObservation obs;
  obs.position = state.positions[agent];
  obs.prev_crossing = crossing_bit;
  obs.last_action_encoded = encode_action(submitted);
  obs.last_reward = last_reward;
  obs.signal_slot = (config.extrinsic_task && agent == 0) ? static_cast<double>(state.signal_bit) : 0.0;
  return obs;
}

}  // namespace pcp
