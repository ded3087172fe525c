#pragma once

// Two-agent perceptual crossing environment on the unit circle.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace pcp {

enum class Action : std::uint8_t { NoOp = 0, Left = 1, Right = 2 };

inline constexpr int kNumActions = 3;
inline constexpr int kNumAgents = 2;
inline constexpr int kObservationSize = 5;

constexpr bool is_active(Action a) { return a != Action::NoOp; }

/// {NoOp, Left, Right} -> {0.0, 0.5, 1.0}
constexpr double encode_action(Action a) { return 0.5 * static_cast<int>(a); }

Action action_from_index(int index);
std::string_view action_name(Action a);

struct EnvConfig {
  double line_length = 1.0;
  double step_size = 0.05;
  double shadow_offset = 0.2;
  double crossing_threshold = 0.05;
  int episode_length = 100;
  std::array<double, 2> object_positions{0.3, 0.7};
  int action_delay = 0;
  bool extrinsic_task = false;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

struct WorldState {
  std::array<double, 2> positions{0.0, 0.0};
  int tick = 0;
  std::array<std::vector<Action>, 2> pending_actions;
  int signal_bit = 1;

  bool operator==(const WorldState&) const = default;
};

struct CrossingReport {
  bool crossed_other = false;
  bool crossed_other_shadow = false;
  bool crossed_own_object = false;

  int crossing_bit() const { return (crossed_other || crossed_other_shadow || crossed_own_object) ? 1 : 0; }
  bool operator==(const CrossingReport&) const = default;
};

struct AgentObservation {
  double position = 0.0;
  int prev_crossing = 0;
  double last_action_encoded = 0.0;
  double last_reward = 0.0;
  double signal_slot = 0.0;

  std::array<double, kObservationSize> to_array() const {
    return {position, static_cast<double>(prev_crossing), last_action_encoded, last_reward, signal_slot};
  }
  bool operator==(const AgentObservation&) const = default;
};

using ActionPair = std::array<Action, 2>;
using ObservationPair = std::array<AgentObservation, 2>;
using CrossingPair = std::array<CrossingReport, 2>;

struct ResetResult {
  WorldState state;
  ObservationPair observations;
};

struct StepResult {
  WorldState state;
  ObservationPair observations;
  CrossingPair crossings;
  std::array<Action, 2> applied{Action::NoOp, Action::NoOp};
  bool done = false;
};

/// Wraps any real onto [0, 1).
double wrap_unit(double x);

/// Shortest distance between two points on the unit circle, in [0, 0.5].
double circular_distance(double a, double b);

double shadow_position(double pos, double offset);

ResetResult reset(const EnvConfig& config, std::uint64_t seed);

CrossingPair detect_crossings(const WorldState& state, const EnvConfig& config);

/// Advances both agents one tick. Submitted actions go through the delay
/// queue; `rewards_prev` are echoed into the returned observations.
StepResult step(const WorldState& state, const ActionPair& actions, const std::array<double, 2>& rewards_prev,
                const EnvConfig& config);

/// Reward to agent0 for the signaling task. Agent1 never receives extrinsic reward.
double extrinsic_reward(int signal_bit, double pos_agent1);

/// Observation of a freshly computed state.
AgentObservation make_observation(const WorldState& state, const EnvConfig& config, int agent, int crossing_bit,
                                  Action submitted, double last_reward);

}  // namespace pcp
