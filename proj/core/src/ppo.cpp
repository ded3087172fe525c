#include "pcp/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pcp/errors.hpp"

namespace pcp {

void PPOConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("PPOConfig: " + what); };
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("0 < gamma <= 1");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) fail("0 < gae_lambda <= 1");
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) fail("0 < clip_ratio < 1");
  if (!(entropy_coeff >= 0.0)) fail("entropy_coeff >= 0");
  if (!(value_coeff > 0.0)) fail("value_coeff > 0");
  if (!(learning_rate > 0.0)) fail("learning_rate > 0");
  if (epochs_per_batch <= 0) fail("epochs_per_batch > 0");
  if (steps_per_iteration <= 0) fail("steps_per_iteration > 0");
  if (iterations < 0) fail("iterations >= 0");
  if (num_parallel_envs <= 0) fail("num_parallel_envs > 0");
  if (minibatch_episodes <= 0) fail("minibatch_episodes > 0");
  if (!(max_grad_norm > 0.0)) fail("max_grad_norm > 0");
  if (hidden <= 0) fail("hidden > 0");
}

std::size_t RolloutBatch::steps() const {
  std::size_t n = 0;
  for (const auto& ep : episodes) n += ep.length();
  return n;
}

GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values, double gamma,
                         double lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T) throw StateError("gae_advantages: rewards and values differ in length");
  GaeResult out;
  out.advantages.assign(T, 0.0);
  out.value_targets.assign(T, 0.0);
  double running = 0.0;
  for (std::size_t s = T; s-- > 0;) {
    const double next_value = (s + 1 < T) ? values[s + 1] : 0.0;
    const double delta = rewards[s] + gamma * next_value - values[s];
    running = delta + gamma * lambda * running;
    out.advantages[s] = running;
    out.value_targets[s] = running + values[s];
  }
  return out;
}

PpoMinibatch make_minibatch(const RolloutBatch& batch, std::span<const std::size_t> episode_indices,
                            std::span<const std::vector<double>> advantages,
                            std::span<const std::vector<double>> value_targets) {
  const int B = static_cast<int>(episode_indices.size());
  std::size_t T = 0;
  for (std::size_t idx : episode_indices) T = std::max(T, batch.episodes[idx].length());
  const int hidden = B > 0 ? static_cast<int>(batch.episodes[episode_indices[0]].initial_h.size()) : 0;

  PpoMinibatch mb;
  mb.observations.assign(T, nn::Mat::Zero(kObservationSize, B));
  mb.actions = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(T), B);
  mb.old_log_probs = nn::Mat::Zero(T, B);
  mb.advantages = nn::Mat::Zero(T, B);
  mb.value_targets = nn::Mat::Zero(T, B);
  mb.mask = nn::Mat::Zero(T, B);
  mb.initial = nn::LstmState::zeros(hidden, B);
  for (int b = 0; b < B; ++b) {
    const std::size_t idx = episode_indices[b];
    const EpisodeRollout& ep = batch.episodes[idx];
    if (ep.initial_h.size() != hidden) throw ConfigError("make_minibatch: recurrent state size mismatch");
    mb.initial.h.col(b) = ep.initial_h;
    mb.initial.c.col(b) = ep.initial_c;
    for (std::size_t t = 0; t < ep.length(); ++t) {
      for (int k = 0; k < kObservationSize; ++k) mb.observations[t](k, b) = ep.observations[t][k];
      mb.actions(static_cast<Eigen::Index>(t), b) = ep.actions[t];
      mb.old_log_probs(t, b) = ep.log_probs[t];
      mb.advantages(t, b) = advantages[idx][t];
      mb.value_targets(t, b) = value_targets[idx][t];
      mb.mask(t, b) = 1.0;
    }
  }
  return mb;
}

double ppo_loss(const ActorCritic& policy, const PpoMinibatch& mb, const PPOConfig& config, nn::Vec* grad,
                PpoStats* stats) {
  const std::size_t T = mb.observations.size();
  const Eigen::Index B = mb.mask.cols();
  const double n = mb.mask.sum();
  if (n == 0.0) return 0.0;

  PolicySequencePass pass;
  policy.forward_sequence(mb.observations, mb.initial, pass);

  std::vector<nn::Mat> dlogits(T, nn::Mat::Zero(kNumActions, B));
  std::vector<nn::Mat> dvalues(T, nn::Mat::Zero(1, B));
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clipped = 0.0;
  double kl = 0.0;
  const double lo = 1.0 - config.clip_ratio;
  const double hi = 1.0 + config.clip_ratio;

  for (std::size_t t = 0; t < T; ++t) {
    for (Eigen::Index b = 0; b < B; ++b) {
      if (mb.mask(t, b) == 0.0) continue;
      const auto z = pass.logits[t].col(b);
      const double m = z.maxCoeff();
      double sum = 0.0;
      for (int k = 0; k < kNumActions; ++k) sum += std::exp(z(k) - m);
      const double log_z = m + std::log(sum);
      std::array<double, kNumActions> logp{};
      std::array<double, kNumActions> p{};
      double h = 0.0;
      for (int k = 0; k < kNumActions; ++k) {
        logp[k] = z(k) - log_z;
        p[k] = std::exp(logp[k]);
        h -= p[k] * logp[k];
      }
      const int a = mb.actions(static_cast<Eigen::Index>(t), b);
      const double adv = mb.advantages(t, b);
      const double ratio = std::exp(logp[a] - mb.old_log_probs(t, b));
      const double surr1 = ratio * adv;
      const double surr2 = std::clamp(ratio, lo, hi) * adv;
      policy_loss -= std::min(surr1, surr2);
      entropy += h;
      kl += mb.old_log_probs(t, b) - logp[a];
      if (ratio < lo || ratio > hi) clipped += 1.0;

      const double v = pass.values[t](0, b);
      const double err = v - mb.value_targets(t, b);
      value_loss += 0.5 * err * err;

      // the clipped branch carries no gradient once the ratio leaves the trust region
      const bool flows = !((adv > 0.0 && ratio > hi) || (adv < 0.0 && ratio < lo));
      for (int k = 0; k < kNumActions; ++k) {
        double g = config.entropy_coeff * p[k] * (logp[k] + h);
        if (flows) g += -adv * ratio * ((k == a ? 1.0 : 0.0) - p[k]);
        dlogits[t](k, b) = g / n;
      }
      dvalues[t](0, b) = config.value_coeff * err / n;
    }
  }
  policy_loss /= n;
  value_loss /= n;
  entropy /= n;
  const double loss = policy_loss + config.value_coeff * value_loss - config.entropy_coeff * entropy;

  if (grad) {
    grad->setZero(policy.params().size());
    policy.backward_sequence(pass, dlogits, dvalues, *grad);
  }
  if (stats) {
    stats->policy_loss += policy_loss;
    stats->value_loss += value_loss;
    stats->entropy += entropy;
    stats->clip_fraction += clipped / n;
    stats->kl += kl / n;
    stats->updates += 1;
  }
  return loss;
}

PpoStats ppo_update(ActorCritic& policy, nn::Adam& optimizer, const RolloutBatch& batch, const PPOConfig& config,
                    Rng& rng) {
  PpoStats stats;
  const std::size_t E = batch.episodes.size();
  if (E == 0) return stats;

  std::vector<std::vector<double>> advantages(E);
  std::vector<std::vector<double>> targets(E);
  double sum = 0.0;
  double sum_sq = 0.0;
  double count = 0.0;
  for (std::size_t e = 0; e < E; ++e) {
    const auto& ep = batch.episodes[e];
    GaeResult g = gae_advantages(ep.rewards, ep.values, config.gamma, config.gae_lambda);
    for (double a : g.advantages) {
      sum += a;
      sum_sq += a * a;
      count += 1.0;
    }
    advantages[e] = std::move(g.advantages);
    targets[e] = std::move(g.value_targets);
  }
  const double mean = sum / count;
  const double var = std::max(0.0, sum_sq / count - mean * mean);
  const double std_dev = std::max(std::sqrt(var), 1e-8);
  for (auto& adv : advantages) {
    for (double& a : adv) a = (a - mean) / std_dev;
  }

  std::vector<std::size_t> order(E);
  nn::Vec grad(policy.params().size());
  double grad_norm = 0.0;
  for (int epoch = 0; epoch < config.epochs_per_batch; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = E; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < E; start += static_cast<std::size_t>(config.minibatch_episodes)) {
      const std::size_t end = std::min(E, start + static_cast<std::size_t>(config.minibatch_episodes));
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const PpoMinibatch mb = make_minibatch(batch, idx, advantages, targets);
      const double loss = ppo_loss(policy, mb, config, &grad, &stats);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        std::ostringstream msg;
        msg << "ppo_update: non-finite loss (" << loss << ") at epoch " << epoch << ", minibatch starting at "
            << start;
        throw RuntimeFailure(msg.str());
      }
      grad_norm += nn::clip_grad_norm(grad, config.max_grad_norm);
      optimizer.step(policy.params(), grad);
    }
  }
  if (stats.updates > 0) {
    const double k = 1.0 / stats.updates;
    stats.policy_loss *= k;
    stats.value_loss *= k;
    stats.entropy *= k;
    stats.clip_fraction *= k;
    stats.kl *= k;
    stats.grad_norm = grad_norm * k;
  }
  return stats;
}

}  // namespace pcp
