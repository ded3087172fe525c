#pragma once

#include <array>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/mutual_information.hpp"

namespace pcp {

enum class RewardMode {
  Curiosity,
  Imitation,
  InfluenceImpressionability,
  InfluenceOnly,
  IIDelay2,
  ExtrinsicWithII,
  ExtrinsicOnly,
  ExtrinsicInfluenceOnly,
};

inline constexpr std::array<RewardMode, 8> kAllRewardModes{
    RewardMode::Curiosity,       RewardMode::Imitation,     RewardMode::InfluenceImpressionability,
    RewardMode::InfluenceOnly,   RewardMode::IIDelay2,      RewardMode::ExtrinsicWithII,
    RewardMode::ExtrinsicOnly,   RewardMode::ExtrinsicInfluenceOnly,
};

std::string_view to_string(RewardMode mode);
/// Throws ConfigError for unknown names.
RewardMode parse_reward_mode(std::string_view name);

struct ModeTraits {
  bool curiosity = false;
  bool imitation = false;
  bool influence = false;
  bool impressionability = false;
  bool extrinsic = false;
  int required_delay = 0;
};

ModeTraits traits(RewardMode mode);

struct CuriosityConfig {
  double n = 4.0;
  void validate() const;
};

struct StepRecord {
  Action action = Action::NoOp;
  int crossing_bit = 0;
};

struct RewardBreakdown {
  double curiosity = 0.0;
  double imitate = 0.0;
  double promote_imitation = 0.0;
  double influence = 0.0;
  double impressionability = 0.0;
  double extrinsic = 0.0;
  double total = 0.0;

  RewardBreakdown& operator+=(const RewardBreakdown& o);
  RewardBreakdown& operator*=(double s);
};

/// Rolling per-agent record of actions and crossing bits plus the two MI chunk buffers.
struct InteractionHistory {
  static constexpr std::size_t kCapacity = 10;

  std::deque<StepRecord> records;
  ChunkBuffer impress_buffer;   // passive-then-active chunks
  ChunkBuffer influence_buffer; // active-then-passive chunks

  explicit InteractionHistory(double alpha = 1.0) : impress_buffer(alpha), influence_buffer(alpha) {}

  void push(const StepRecord& r) {
    records.push_back(r);
    if (records.size() > kCapacity) records.pop_front();
  }
  void clear_records() { records.clear(); }
  void clear() {
    records.clear();
    impress_buffer.clear();
    influence_buffer.clear();
  }
};

/// r = 1 - confidence for a correct prediction, confidence^n for an error.
double curiosity_reward(int error, double confidence, const CuriosityConfig& config);

/// Passive window (records 1-5) followed by active reproduction (records 6-10).
double imitate_reward(std::span<const StepRecord> history);

/// Active window (records 1-5) followed by a passively observed echo (records 6-10).
double promote_imitation_reward(std::span<const StepRecord> history);

/// Chunks extracted from the most recent 4-step window, if the trigger
/// conditions hold. `records` may hold a 5th, older record; it only supplies
/// the crossing bit preceding the window.
struct ChunkExtraction {
  std::optional<Chunk> passive_then_active;
  std::optional<Chunk> active_then_passive;
};

ChunkExtraction extract_chunks(std::span<const StepRecord> records);

/// Appends extracted chunks to the matching buffers; returns {impress_added, influence_added}.
std::pair<bool, bool> update_mi_buffers(InteractionHistory& history);

struct MiRewards {
  double influence = 0.0;
  double impressionability = 0.0;
};

MiRewards influence_impressionability_reward(const InteractionHistory& history, std::pair<bool, bool> added,
                                             bool influence_only);

/// extrinsic + intrinsic_scale * (sum of mode-enabled intrinsic parts).
double compose_total(RewardMode mode, const RewardBreakdown& parts, double intrinsic_scale);

/// Per-agent bookkeeping for the history-driven components (imitation and MI).
/// Curiosity and extrinsic terms are supplied by the caller.
class AgentRewardTracker {
 public:
  AgentRewardTracker(RewardMode mode, double mi_alpha);

  void reset();
  /// Drops the step records but keeps the chunk buffers rolling.
  void begin_episode() { history_.clear_records(); }

  /// Records the step and fills imitation and MI components per the mode.
  RewardBreakdown record(Action applied, int crossing_bit);

  const InteractionHistory& history() const { return history_; }
  InteractionHistory& history() { return history_; }

 private:
  ModeTraits traits_;
  InteractionHistory history_;
};

}  // namespace pcp
