#include "pcp/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcp/errors.hpp"

namespace pcp {

void PredictorConfig::validate() const {
  if (hidden <= 0) throw ConfigError("PredictorConfig: hidden > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("PredictorConfig: learning_rate > 0");
  if (epochs < 0) throw ConfigError("PredictorConfig: epochs >= 0");
  if (minibatch_episodes <= 0) throw ConfigError("PredictorConfig: minibatch_episodes > 0");
  if (dataset_capacity == 0) throw ConfigError("PredictorConfig: dataset_capacity > 0");
}

Prediction make_prediction(double p) {
  Prediction out;
  out.p = p;
  out.predicted_class = p >= 0.5 ? 1 : 0;
  out.confidence = std::max(p, 1.0 - p);
  return out;
}

int compute_error(const Prediction& prediction, int actual_crossing) {
  return prediction.predicted_class != actual_crossing ? 1 : 0;
}

void TrajectoryDataset::add_episode(std::span<const AgentObservation> observations) {
  TrajectoryEpisode ep;
  if (observations.size() >= 2) {
    ep.observations.reserve(observations.size() - 1);
    ep.labels.reserve(observations.size() - 1);
    for (std::size_t t = 0; t + 1 < observations.size(); ++t) {
      ep.observations.push_back(observations[t].to_array());
      ep.labels.push_back(static_cast<std::uint8_t>(observations[t + 1].prev_crossing));
    }
  }
  add_episode(std::move(ep));
}

void TrajectoryDataset::add_episode(TrajectoryEpisode episode) {
  if (episode.observations.size() != episode.labels.size()) {
    throw StateError("TrajectoryDataset: observations and labels are misaligned");
  }
  if (episode.observations.empty()) return;
  episodes_.push_back(std::move(episode));
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

PredictorModel::PredictorModel(int hidden, std::uint64_t seed)
    : lstm_(kObservationSize, hidden), head_(hidden, 1), params_(nn::Vec::Zero(lstm_.size() + head_.size())) {
  Rng rng(seed);
  lstm_.init(params_.data(), rng);
  // zero output layer: an untrained model answers p = 0.5
  head_.zero(params_.data() + lstm_.size());
}

Prediction PredictorModel::predict_next(nn::LstmState& state, const AgentObservation& obs) const {
  const auto a = obs.to_array();
  nn::Mat x = Eigen::Map<const nn::Mat>(a.data(), kObservationSize, 1);
  return make_prediction(predict_batch(x, state)(0));
}

nn::Vec PredictorModel::predict_batch(const nn::Mat& x, nn::LstmState& state) const {
  lstm_.step(params_.data(), x, state);
  const nn::Mat z = head_.forward(head_params(), state.h);
  nn::Vec p(z.cols());
  for (Eigen::Index b = 0; b < z.cols(); ++b) p(b) = nn::sigmoid(z(0, b));
  return p;
}

double PredictorModel::loss_and_grad(std::span<const TrajectoryEpisode* const> episodes, nn::Vec* grad) const {
  const int B = static_cast<int>(episodes.size());
  if (B == 0) return 0.0;
  std::size_t T = 0;
  for (const auto* ep : episodes) T = std::max(T, ep->observations.size());

  // shorter episodes are zero-padded and masked out of the loss
  std::vector<nn::Mat> xs(T, nn::Mat::Zero(kObservationSize, B));
  nn::Mat labels = nn::Mat::Zero(T, B);
  nn::Mat mask = nn::Mat::Zero(T, B);
  double count = 0.0;
  for (int b = 0; b < B; ++b) {
    const auto& ep = *episodes[b];
    for (std::size_t t = 0; t < ep.observations.size(); ++t) {
      for (int k = 0; k < kObservationSize; ++k) xs[t](k, b) = ep.observations[t][k];
      labels(t, b) = ep.labels[t];
      mask(t, b) = 1.0;
      count += 1.0;
    }
  }
  if (count == 0.0) return 0.0;

  nn::LstmTape tape;
  lstm_.forward(params_.data(), xs, initial_state(B), tape);

  double loss = 0.0;
  std::vector<nn::Mat> dh(T);
  if (grad) grad->setZero(params_.size());
  for (std::size_t t = 0; t < T; ++t) {
    const nn::Mat z = head_.forward(head_params(), tape.h[t]);
    nn::Mat dz = nn::Mat::Zero(1, B);
    for (int b = 0; b < B; ++b) {
      if (mask(t, b) == 0.0) continue;
      const double zz = z(0, b);
      const double y = labels(t, b);
      // softplus(z) - y z
      const double softplus = zz > 0.0 ? zz + std::log1p(std::exp(-zz)) : std::log1p(std::exp(zz));
      loss += softplus - y * zz;
      dz(0, b) = (nn::sigmoid(zz) - y) / count;
    }
    if (grad) {
      dh[t] = head_.backward(head_params(), tape.h[t], dz, grad->data() + lstm_.size());
    }
  }
  if (grad) lstm_.backward(params_.data(), tape, dh, grad->data());
  return loss / count;
}

PredictorTrainResult train_offline(PredictorModel& model, nn::Adam& optimizer, const TrajectoryDataset& dataset,
                                   int epochs, int minibatch_episodes, Rng& rng) {
  PredictorTrainResult result;
  if (dataset.empty() || epochs <= 0) return result;
  const auto& eps = dataset.episodes();
  std::vector<std::size_t> order(eps.size());
  nn::Vec grad(model.params().size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(minibatch_episodes)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(minibatch_episodes));
      std::vector<const TrajectoryEpisode*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(&eps[order[k]]);
      const double loss = model.loss_and_grad(batch, &grad);
      if (!std::isfinite(loss)) throw RuntimeFailure("predictor: non-finite loss");
      optimizer.step(model.params(), grad);
      total += loss;
      ++batches;
    }
    result.mean_loss = total / batches;
  }
  result.trained = true;
  return result;
}

CrossingPredictor::CrossingPredictor(const PredictorConfig& cfg, std::uint64_t seed)
    : config(cfg),
      model(cfg.hidden, seed),
      optimizer(model.params().size(), nn::AdamConfig{cfg.learning_rate}),
      dataset(cfg.dataset_capacity),
      rng(seed ^ 0x9e3779b97f4a7c15ULL) {}

PredictorTrainResult CrossingPredictor::train() {
  return train_offline(model, optimizer, dataset, config.epochs, config.minibatch_episodes, rng);
}

}  // namespace pcp
