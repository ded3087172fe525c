#pragma once

// One human-vs-machine session: a human holds an action for one slot while a
// frozen policy drives the other. No networking here; the server owns timing.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcp/live/wire.hpp"
#include "pcp/trace.hpp"
#include "pcp/trainer.hpp"

namespace pcp::live {

struct SessionOptions {
  int human_slot = 0;
  double tick_hz = 10.0;
  /// 0 keeps the checkpoint's episode length.
  int episode_length = 1200;
  bool greedy = false;
  /// A mark at tick t is a hit if the human is crossing the machine anywhere in [t - tol, t + tol].
  int mark_tolerance = 1;

  void validate() const;
};

class LiveSession {
 public:
  /// Resets the env from `seed`. Throws ConfigError on bad options.
  LiveSession(std::string id, std::shared_ptr<const LoadedModels> models, const SessionOptions& options,
              std::uint64_t seed);

  const std::string& id() const { return id_; }
  std::uint64_t seed() const { return seed_; }
  int tick() const { return state_.tick; }
  int human_slot() const { return options_.human_slot; }
  int machine_slot() const { return 1 - options_.human_slot; }
  const EnvConfig& env() const { return env_; }
  const SessionOptions& options() const { return options_; }
  std::chrono::nanoseconds period() const;

  /// Episode length reached; advance_tick is no longer allowed.
  bool finished() const { return state_.tick >= env_.episode_length; }
  bool ended() const { return ended_; }

  ConfigMessage config_message(bool resumed) const;

  /// Held until the next call.
  void set_input(Action action) { held_ = action; }
  Action held_input() const { return held_; }

  /// One env step: machine samples from its policy, the human's held action is
  /// applied, buzz = the human's crossing bit. Throws StateError when finished or ended.
  TickMessage advance_tick();

  /// Marks refer to tick indices already sent (0 .. tick()). Throws StateError otherwise.
  MarkAckMessage record_mark(int tick);

  /// Scores marks, computes the human's crossing proportions and, when
  /// `trace_dir` is non-empty, writes <trace_dir>/<id>.csv. Throws StateError if already ended.
  SessionSummaryMessage end_session(const std::filesystem::path& trace_dir = {});

  std::span<const TraceRow> trace() const { return trace_; }
  const WorldState& state() const { return state_; }

 private:
  std::string id_;
  std::shared_ptr<const LoadedModels> models_;
  SessionOptions options_;
  EnvConfig env_;
  std::uint64_t seed_;
  Rng rng_;
  WorldState state_;
  ObservationPair obs_;
  std::array<double, 2> rewards_prev_{0.0, 0.0};
  nn::LstmState machine_state_;
  std::array<AgentRewardTracker, 2> trackers_;
  std::array<std::optional<CrossingPredictor>, 2> predictors_;
  std::array<nn::LstmState, 2> predictor_state_;
  Action held_ = Action::NoOp;
  std::vector<int> marks_;
  std::vector<TraceRow> trace_;
  bool ended_ = false;
};

}  // namespace pcp::live
