#include "pcp/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcp/errors.hpp"

namespace pcp {

namespace {

struct ModeName {
  RewardMode mode;
  std::string_view name;
};

constexpr std::array<ModeName, 8> kModeNames{{
    {RewardMode::Curiosity, "curiosity"},
    {RewardMode::Imitation, "imitation"},
    {RewardMode::InfluenceImpressionability, "influence_impressionability"},
    {RewardMode::InfluenceOnly, "influence_only"},
    {RewardMode::IIDelay2, "ii_delay2"},
    {RewardMode::ExtrinsicWithII, "extrinsic_with_ii"},
    {RewardMode::ExtrinsicOnly, "extrinsic_only"},
    {RewardMode::ExtrinsicInfluenceOnly, "extrinsic_influence_only"},
}};

using Window = std::array<TransitionCategory, 4>;

Window window_transitions(std::span<const StepRecord> w) {
  Window out{};
  for (std::size_t k = 1; k < 5; ++k) out[k - 1] = categorize_transition(w[k - 1].crossing_bit, w[k].crossing_bit);
  return out;
}

bool all_passive(std::span<const StepRecord> w) {
  return std::all_of(w.begin(), w.end(), [](const StepRecord& r) { return !is_active(r.action); });
}

bool any_active(std::span<const StepRecord> w) { return !all_passive(w); }

// matches / opportunities where opportunities are the non-NoChange slots of `lead`
double pattern_match(const Window& lead, const Window& follow) {
  int opportunities = 0;
  int matches = 0;
  for (std::size_t k = 0; k < lead.size(); ++k) {
    if (lead[k] == TransitionCategory::NoChange) continue;
    ++opportunities;
    if (follow[k] == lead[k]) ++matches;
  }
  return opportunities == 0 ? 0.0 : static_cast<double>(matches) / opportunities;
}

}  // namespace

std::string_view to_string(RewardMode mode) {
  for (const auto& m : kModeNames) {
    if (m.mode == mode) return m.name;
  }
  return "unknown";
}

RewardMode parse_reward_mode(std::string_view name) {
  for (const auto& m : kModeNames) {
    if (m.name == name) return m.mode;
  }
  throw ConfigError("unknown reward mode: " + std::string(name));
}

ModeTraits traits(RewardMode mode) {
  ModeTraits t;
  switch (mode) {
    case RewardMode::Curiosity: t.curiosity = true; break;
    case RewardMode::Imitation: t.imitation = true; break;
    case RewardMode::InfluenceImpressionability: t.influence = t.impressionability = true; break;
    case RewardMode::InfluenceOnly: t.influence = true; break;
    case RewardMode::IIDelay2:
      t.influence = t.impressionability = true;
      t.required_delay = 2;
      break;
    case RewardMode::ExtrinsicWithII: t.influence = t.impressionability = t.extrinsic = true; break;
    case RewardMode::ExtrinsicOnly: t.extrinsic = true; break;
    case RewardMode::ExtrinsicInfluenceOnly: t.influence = t.extrinsic = true; break;
    default: throw ConfigError("unknown reward mode");
  }
  return t;
}

void CuriosityConfig::validate() const {
  if (!(n >= 1.0) || !std::isfinite(n)) throw ConfigError("CuriosityConfig: n >= 1");
}

RewardBreakdown& RewardBreakdown::operator+=(const RewardBreakdown& o) {
  curiosity += o.curiosity;
  imitate += o.imitate;
  promote_imitation += o.promote_imitation;
  influence += o.influence;
  impressionability += o.impressionability;
  extrinsic += o.extrinsic;
  total += o.total;
  return *this;
}

RewardBreakdown& RewardBreakdown::operator*=(double s) {
  curiosity *= s;
  imitate *= s;
  promote_imitation *= s;
  influence *= s;
  impressionability *= s;
  extrinsic *= s;
  total *= s;
  return *this;
}

double curiosity_reward(int error, double confidence, const CuriosityConfig& config) {
  if (error == 0) return 1.0 - confidence;
  return std::pow(confidence, config.n);
}

double imitate_reward(std::span<const StepRecord> history) {
  if (history.size() < 10) return 0.0;
  const auto last = history.last(10);
  const auto w1 = last.first(5);
  const auto w2 = last.last(5);
  if (!all_passive(w1) || !any_active(w2)) return 0.0;
  return pattern_match(window_transitions(w1), window_transitions(w2));
}

double promote_imitation_reward(std::span<const StepRecord> history) {
  if (history.size() < 10) return 0.0;
  const auto last = history.last(10);
  const auto w1 = last.first(5);
  const auto w2 = last.last(5);
  if (!any_active(w1) || !all_passive(w2)) return 0.0;
  return pattern_match(window_transitions(w1), window_transitions(w2));
}

ChunkExtraction extract_chunks(std::span<const StepRecord> records) {
  ChunkExtraction out;
  if (records.size() < 4) return out;
  const auto w = records.last(4);
  std::array<TransitionCategory, 4> t{};
  // the first step's transition needs the record preceding the window
  t[0] = records.size() >= 5 ? categorize_transition(records[records.size() - 5].crossing_bit, w[0].crossing_bit)
                             : TransitionCategory::NoChange;
  for (std::size_t k = 1; k < 4; ++k) t[k] = categorize_transition(w[k - 1].crossing_bit, w[k].crossing_bit);

  auto qualifies = [&](std::size_t k) { return is_active(w[k].action) && t[k] != TransitionCategory::NoChange; };
  auto passive = [&](std::size_t k) { return !is_active(w[k].action); };

  if (passive(0) && passive(1) && (qualifies(2) || qualifies(3))) {
    Chunk c;
    c.direction = ChunkDirection::PassiveThenActive;
    c.passive_category = t[1];
    c.active_category = qualifies(3) ? t[3] : t[2];
    out.passive_then_active = c;
  }
  if (passive(2) && passive(3) && (qualifies(0) || qualifies(1))) {
    Chunk c;
    c.direction = ChunkDirection::ActiveThenPassive;
    c.active_category = qualifies(1) ? t[1] : t[0];
    c.passive_category = t[3];
    out.active_then_passive = c;
  }
  return out;
}

std::pair<bool, bool> update_mi_buffers(InteractionHistory& history) {
  const std::vector<StepRecord> recs(history.records.begin(), history.records.end());
  const ChunkExtraction ex = extract_chunks(recs);
  if (ex.passive_then_active) history.impress_buffer.push(*ex.passive_then_active);
  if (ex.active_then_passive) history.influence_buffer.push(*ex.active_then_passive);
  return {ex.passive_then_active.has_value(), ex.active_then_passive.has_value()};
}

MiRewards influence_impressionability_reward(const InteractionHistory& history, std::pair<bool, bool> added,
                                             bool influence_only) {
  MiRewards r;
  if (added.first && !influence_only) r.impressionability = windowed_mi_delta(history.impress_buffer);
  if (added.second) r.influence = windowed_mi_delta(history.influence_buffer);
  return r;
}

double compose_total(RewardMode mode, const RewardBreakdown& parts, double intrinsic_scale) {
  const ModeTraits t = traits(mode);
  double intrinsic = 0.0;
  if (t.curiosity) intrinsic += parts.curiosity;
  if (t.imitation) intrinsic += parts.imitate + parts.promote_imitation;
  if (t.influence) intrinsic += parts.influence;
  if (t.impressionability) intrinsic += parts.impressionability;
  const double extrinsic = t.extrinsic ? parts.extrinsic : 0.0;
  return extrinsic + intrinsic_scale * intrinsic;
}

AgentRewardTracker::AgentRewardTracker(RewardMode mode, double mi_alpha)
    : traits_(traits(mode)), history_(mi_alpha) {}

void AgentRewardTracker::reset() { history_.clear(); }

RewardBreakdown AgentRewardTracker::record(Action applied, int crossing_bit) {
  history_.push({applied, crossing_bit});
  RewardBreakdown r;
  if (traits_.imitation) {
    const std::vector<StepRecord> recs(history_.records.begin(), history_.records.end());
    r.imitate = imitate_reward(recs);
    r.promote_imitation = promote_imitation_reward(recs);
  }
  if (traits_.influence || traits_.impressionability) {
    const auto added = update_mi_buffers(history_);
    const MiRewards mi = influence_impressionability_reward(history_, added, !traits_.impressionability);
    r.influence = mi.influence;
    r.impressionability = mi.impressionability;
  }
  return r;
}

}  // namespace pcp
