#include "pcp/policy.hpp"

#include <algorithm>
#include <cmath>

namespace pcp {

ActorCritic::ActorCritic(int hidden, std::uint64_t seed)
    : lstm_(kObservationSize, hidden),
      pi_(hidden, kNumActions),
      v_(hidden, 1),
      params_(nn::Vec::Zero(lstm_.size() + pi_.size() + v_.size())) {
  Rng rng(seed);
  lstm_.init(params_.data(), rng);
  // near-uniform initial action distribution
  pi_.init(params_.data() + lstm_.size(), rng, 0.01);
  v_.init(params_.data() + lstm_.size() + pi_.size(), rng, 1.0);
}

PolicyOutput ActorCritic::step(const nn::Mat& x, nn::LstmState& state) const {
  lstm_.step(params_.data(), x, state);
  PolicyOutput out;
  out.logits = pi_.forward(pi_params(), state.h);
  out.values = v_.forward(v_params(), state.h).row(0).transpose();
  return out;
}

void ActorCritic::forward_sequence(std::span<const nn::Mat> xs, const nn::LstmState& initial,
                                   PolicySequencePass& pass) const {
  lstm_.forward(params_.data(), xs, initial, pass.tape);
  pass.logits.resize(xs.size());
  pass.values.resize(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    pass.logits[t] = pi_.forward(pi_params(), pass.tape.h[t]);
    pass.values[t] = v_.forward(v_params(), pass.tape.h[t]);
  }
}

void ActorCritic::backward_sequence(const PolicySequencePass& pass, std::span<const nn::Mat> dlogits,
                                    std::span<const nn::Mat> dvalues, nn::Vec& grad) const {
  const std::size_t T = pass.tape.h.size();
  std::vector<nn::Mat> dh(T);
  double* g_pi = grad.data() + lstm_.size();
  double* g_v = g_pi + pi_.size();
  for (std::size_t t = 0; t < T; ++t) {
    dh[t] = pi_.backward(pi_params(), pass.tape.h[t], dlogits[t], g_pi);
    dh[t] += v_.backward(v_params(), pass.tape.h[t], dvalues[t], g_v);
  }
  lstm_.backward(params_.data(), pass.tape, dh, grad.data());
}

std::array<double, kNumActions> softmax(const Eigen::Ref<const nn::Vec>& logits) {
  std::array<double, kNumActions> p{};
  const double m = logits.maxCoeff();
  double sum = 0.0;
  for (int k = 0; k < kNumActions; ++k) {
    p[k] = std::exp(logits(k) - m);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

int sample_action(const std::array<double, kNumActions>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < kNumActions; ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return kNumActions - 1;
}

int greedy_action(const std::array<double, kNumActions>& probs) {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

}  // namespace pcp
