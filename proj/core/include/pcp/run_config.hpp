#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/ppo.hpp"
#include "pcp/predictor.hpp"
#include "pcp/rewards.hpp"

namespace pcp {

struct RunConfig {
  std::string name = "run";
  RewardMode mode = RewardMode::InfluenceImpressionability;
  EnvConfig env;
  PPOConfig ppo;
  CuriosityConfig curiosity;
  PredictorConfig predictor;
  double mi_alpha = 1.0;
  double intrinsic_scale = 1.0;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string output_dir = "runs";
  int checkpoint_every = 50;
  int trajectory_episodes = 3;

  /// Component invariants plus the mode-specific constraints:
  /// ii_delay2 needs env.action_delay = 2, and extrinsic modes go with
  /// env.extrinsic_task = true (and only they do).
  void validate() const;
};

/// Defaults for a mode, with the environment flags that mode requires.
RunConfig default_run_config(RewardMode mode);

nlohmann::ordered_json to_json(const RunConfig& config);

/// Fields absent from `j` take the defaults of its "mode". Unknown keys are
/// rejected. The result is validated.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Applies "dotted.key=value" overrides; values parse as JSON when possible,
/// otherwise as strings.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace pcp
