#include "pcp/run_config.hpp"

#include <fstream>

#include "pcp/errors.hpp"

namespace pcp {

using nlohmann::json;
using nlohmann::ordered_json;

void RunConfig::validate() const {
  env.validate();
  ppo.validate();
  curiosity.validate();
  predictor.validate();
  if (name.empty()) throw ConfigError("RunConfig: name must be non-empty");
  if (!(mi_alpha > 0.0)) throw ConfigError("RunConfig: mi_alpha > 0");
  if (!(intrinsic_scale >= 0.0)) throw ConfigError("RunConfig: intrinsic_scale >= 0");
  if (seeds.empty()) throw ConfigError("RunConfig: at least one seed");
  if (checkpoint_every < 0) throw ConfigError("RunConfig: checkpoint_every >= 0");
  if (trajectory_episodes < 0) throw ConfigError("RunConfig: trajectory_episodes >= 0");
  const ModeTraits t = traits(mode);
  if (t.required_delay != 0 && env.action_delay != t.required_delay) {
    throw ConfigError("constraint ii_delay2_requires_action_delay_2: mode " + std::string(to_string(mode)) +
                      " needs env.action_delay = " + std::to_string(t.required_delay) + " (got " +
                      std::to_string(env.action_delay) + ")");
  }
  if (t.extrinsic && !env.extrinsic_task) {
    throw ConfigError("constraint extrinsic_mode_requires_extrinsic_task: mode " + std::string(to_string(mode)) +
                      " needs env.extrinsic_task = true");
  }
  if (!t.extrinsic && env.extrinsic_task) {
    throw ConfigError("constraint extrinsic_task_requires_extrinsic_mode: env.extrinsic_task is only valid with an "
                      "extrinsic_* mode (got " + std::string(to_string(mode)) + ")");
  }
  const int per_round = env.episode_length * ppo.num_parallel_envs;
  if (ppo.steps_per_iteration % per_round != 0) {
    throw ConfigError("constraint whole_episodes_per_iteration: ppo.steps_per_iteration (" +
                      std::to_string(ppo.steps_per_iteration) + ") must be a multiple of env.episode_length * "
                      "ppo.num_parallel_envs (" + std::to_string(per_round) + ")");
  }
}

RunConfig default_run_config(RewardMode mode) {
  RunConfig c;
  c.mode = mode;
  c.name = std::string(to_string(mode));
  const ModeTraits t = traits(mode);
  c.env.action_delay = t.required_delay;
  c.env.extrinsic_task = t.extrinsic;
  return c;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["mode"] = std::string(to_string(c.mode));
  j["env"] = {
      {"step_size", c.env.step_size},
      {"shadow_offset", c.env.shadow_offset},
      {"crossing_threshold", c.env.crossing_threshold},
      {"episode_length", c.env.episode_length},
      {"object_positions", {c.env.object_positions[0], c.env.object_positions[1]}},
      {"action_delay", c.env.action_delay},
      {"extrinsic_task", c.env.extrinsic_task},
  };
  j["ppo"] = {
      {"gamma", c.ppo.gamma},
      {"gae_lambda", c.ppo.gae_lambda},
      {"clip_ratio", c.ppo.clip_ratio},
      {"entropy_coeff", c.ppo.entropy_coeff},
      {"value_coeff", c.ppo.value_coeff},
      {"learning_rate", c.ppo.learning_rate},
      {"epochs_per_batch", c.ppo.epochs_per_batch},
      {"steps_per_iteration", c.ppo.steps_per_iteration},
      {"iterations", c.ppo.iterations},
      {"num_parallel_envs", c.ppo.num_parallel_envs},
      {"minibatch_episodes", c.ppo.minibatch_episodes},
      {"max_grad_norm", c.ppo.max_grad_norm},
      {"hidden", c.ppo.hidden},
  };
  j["curiosity"] = {{"n", c.curiosity.n}};
  j["predictor"] = {
      {"hidden", c.predictor.hidden},
      {"learning_rate", c.predictor.learning_rate},
      {"epochs", c.predictor.epochs},
      {"minibatch_episodes", c.predictor.minibatch_episodes},
      {"dataset_capacity", c.predictor.dataset_capacity},
  };
  j["mi_alpha"] = c.mi_alpha;
  j["intrinsic_scale"] = c.intrinsic_scale;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["checkpoint_every"] = c.checkpoint_every;
  j["trajectory_episodes"] = c.trajectory_episodes;
  return j;
}

namespace {

void reject_unknown(const json& given, const json& known, const std::string& prefix) {
  if (!given.is_object()) return;
  for (auto it = given.begin(); it != given.end(); ++it) {
    if (!known.contains(it.key())) throw ConfigError("unknown config key: " + prefix + it.key());
    if (it.value().is_object()) reject_unknown(it.value(), known.at(it.key()), prefix + it.key() + ".");
  }
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RewardMode mode = RewardMode::InfluenceImpressionability;
  if (j.contains("mode")) {
    if (!j.at("mode").is_string()) throw ConfigError("config key mode must be a string");
    mode = parse_reward_mode(j.at("mode").get<std::string>());
  }
  json merged = json(to_json(default_run_config(mode)));
  reject_unknown(j, merged, "");
  merged.merge_patch(j);

  RunConfig c;
  try {
    c.name = merged.at("name").get<std::string>();
    c.mode = mode;
    const json& e = merged.at("env");
    c.env.step_size = e.at("step_size").get<double>();
    c.env.shadow_offset = e.at("shadow_offset").get<double>();
    c.env.crossing_threshold = e.at("crossing_threshold").get<double>();
    c.env.episode_length = e.at("episode_length").get<int>();
    const auto objects = e.at("object_positions").get<std::vector<double>>();
    if (objects.size() != 2) throw ConfigError("env.object_positions must hold two values");
    c.env.object_positions = {objects[0], objects[1]};
    c.env.action_delay = e.at("action_delay").get<int>();
    c.env.extrinsic_task = e.at("extrinsic_task").get<bool>();
    const json& p = merged.at("ppo");
    c.ppo.gamma = p.at("gamma").get<double>();
    c.ppo.gae_lambda = p.at("gae_lambda").get<double>();
    c.ppo.clip_ratio = p.at("clip_ratio").get<double>();
    c.ppo.entropy_coeff = p.at("entropy_coeff").get<double>();
    c.ppo.value_coeff = p.at("value_coeff").get<double>();
    c.ppo.learning_rate = p.at("learning_rate").get<double>();
    c.ppo.epochs_per_batch = p.at("epochs_per_batch").get<int>();
    c.ppo.steps_per_iteration = p.at("steps_per_iteration").get<int>();
    c.ppo.iterations = p.at("iterations").get<int>();
    c.ppo.num_parallel_envs = p.at("num_parallel_envs").get<int>();
    c.ppo.minibatch_episodes = p.at("minibatch_episodes").get<int>();
    c.ppo.max_grad_norm = p.at("max_grad_norm").get<double>();
    c.ppo.hidden = p.at("hidden").get<int>();
    c.curiosity.n = merged.at("curiosity").at("n").get<double>();
    const json& pr = merged.at("predictor");
    c.predictor.hidden = pr.at("hidden").get<int>();
    c.predictor.learning_rate = pr.at("learning_rate").get<double>();
    c.predictor.epochs = pr.at("epochs").get<int>();
    c.predictor.minibatch_episodes = pr.at("minibatch_episodes").get<int>();
    c.predictor.dataset_capacity = pr.at("dataset_capacity").get<std::size_t>();
    c.mi_alpha = merged.at("mi_alpha").get<double>();
    c.intrinsic_scale = merged.at("intrinsic_scale").get<double>();
    c.seeds = merged.at("seeds").get<std::vector<std::uint64_t>>();
    c.output_dir = merged.at("output_dir").get<std::string>();
    c.checkpoint_every = merged.at("checkpoint_every").get<int>();
    c.trajectory_episodes = merged.at("trajectory_episodes").get<int>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  c.validate();
  return c;
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + o);
    const std::string key = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ConfigError("bad override key: " + key);
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      if (!node->contains(part)) (*node)[part] = json::object();
      node = &(*node)[part];
      start = dot + 1;
    }
  }
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    j = json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
  }
  apply_overrides(j, overrides);
  return run_config_from_json(j);
}

}  // namespace pcp
