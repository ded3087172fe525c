#pragma once

// Per-agent recurrent next-step crossing predictor.

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/nn/adam.hpp"
#include "pcp/nn/lstm.hpp"
#include "pcp/rng.hpp"

namespace pcp {

struct PredictorConfig {
  int hidden = 32;
  double learning_rate = 1e-3;
  int epochs = 1;
  int minibatch_episodes = 20;
  std::size_t dataset_capacity = 200;

  void validate() const;
};

struct Prediction {
  double p = 0.5;
  int predicted_class = 1;
  double confidence = 0.5;
};

/// class = 1 iff p >= 0.5; confidence = max(p, 1 - p).
Prediction make_prediction(double p);

/// e = 1 iff the predicted class differs from what happened.
int compute_error(const Prediction& prediction, int actual_crossing);

/// Observations o_0..o_{T-1} with labels c_1..c_T: label t is the crossing
/// bit one step after observation t.
struct TrajectoryEpisode {
  std::vector<std::array<double, kObservationSize>> observations;
  std::vector<std::uint8_t> labels;
};

class TrajectoryDataset {
 public:
  explicit TrajectoryDataset(std::size_t capacity = 200) : capacity_(capacity) {}

  /// `observations` runs through the terminal observation of the episode.
  /// The terminal entry has no successor and so carries no label.
  void add_episode(std::span<const AgentObservation> observations);
  void add_episode(TrajectoryEpisode episode);

  std::size_t size() const { return episodes_.size(); }
  bool empty() const { return episodes_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<TrajectoryEpisode>& episodes() const { return episodes_; }
  void clear() { episodes_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<TrajectoryEpisode> episodes_;
};

class PredictorModel {
 public:
  explicit PredictorModel(int hidden = 32, std::uint64_t seed = 0);

  int hidden() const { return lstm_.hidden(); }
  nn::LstmState initial_state(int batch = 1) const { return nn::LstmState::zeros(hidden(), batch); }

  Prediction predict_next(nn::LstmState& state, const AgentObservation& obs) const;
  /// Batched probabilities for `x` (kObservationSize x B).
  nn::Vec predict_batch(const nn::Mat& x, nn::LstmState& state) const;

  /// Mean binary cross-entropy over all labels of `episodes`; fills `grad` when given.
  double loss_and_grad(std::span<const TrajectoryEpisode* const> episodes, nn::Vec* grad) const;

  const nn::Vec& params() const { return params_; }
  nn::Vec& params() { return params_; }

 private:
  const double* head_params() const { return params_.data() + lstm_.size(); }

  nn::LstmLayer lstm_;
  nn::DenseLayer head_;
  nn::Vec params_;
};

struct PredictorTrainResult {
  bool trained = false;
  double mean_loss = 0.0;
};

/// Gradient descent on cross-entropy over full episode sequences. An empty
/// dataset is a no-op reported through `trained = false`.
PredictorTrainResult train_offline(PredictorModel& model, nn::Adam& optimizer, const TrajectoryDataset& dataset,
                                   int epochs, int minibatch_episodes, Rng& rng);

/// Model, optimizer, dataset and shuffle stream owned by one agent.
struct CrossingPredictor {
  PredictorConfig config;
  PredictorModel model;
  nn::Adam optimizer;
  TrajectoryDataset dataset;
  Rng rng;

  CrossingPredictor(const PredictorConfig& cfg, std::uint64_t seed);

  PredictorTrainResult train();
};

}  // namespace pcp
