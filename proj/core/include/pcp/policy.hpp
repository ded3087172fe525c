#pragma once

// Recurrent actor-critic: shared LSTM trunk, action logits and value heads.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pcp/env.hpp"
#include "pcp/nn/lstm.hpp"
#include "pcp/rng.hpp"

namespace pcp {

struct PolicyOutput {
  nn::Mat logits;  // kNumActions x B
  nn::Vec values;  // B
};

/// Per-timestep outputs of a sequence pass, kept for backprop.
struct PolicySequencePass {
  nn::LstmTape tape;
  std::vector<nn::Mat> logits;
  std::vector<nn::Mat> values;  // 1 x B
};

class ActorCritic {
 public:
  explicit ActorCritic(int hidden = 64, std::uint64_t seed = 0);

  int hidden() const { return lstm_.hidden(); }
  nn::LstmState initial_state(int batch = 1) const { return nn::LstmState::zeros(hidden(), batch); }

  /// One step for a batch of observations (kObservationSize x B).
  PolicyOutput step(const nn::Mat& x, nn::LstmState& state) const;

  void forward_sequence(std::span<const nn::Mat> xs, const nn::LstmState& initial, PolicySequencePass& pass) const;

  /// Accumulates parameter gradients given dL/dlogits and dL/dvalue per timestep.
  void backward_sequence(const PolicySequencePass& pass, std::span<const nn::Mat> dlogits,
                         std::span<const nn::Mat> dvalues, nn::Vec& grad) const;

  const nn::Vec& params() const { return params_; }
  nn::Vec& params() { return params_; }

 private:
  const double* pi_params() const { return params_.data() + lstm_.size(); }
  const double* v_params() const { return pi_params() + pi_.size(); }

  nn::LstmLayer lstm_;
  nn::DenseLayer pi_;
  nn::DenseLayer v_;
  nn::Vec params_;
};

/// Numerically stable softmax of one logit column.
std::array<double, kNumActions> softmax(const Eigen::Ref<const nn::Vec>& logits);

/// Samples an action index from `probs` using one uniform draw.
int sample_action(const std::array<double, kNumActions>& probs, Rng& rng);

int greedy_action(const std::array<double, kNumActions>& probs);

}  // namespace pcp
