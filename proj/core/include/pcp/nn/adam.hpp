#pragma once

#include <cstdint>

#include "pcp/nn/lstm.hpp"

namespace pcp::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamConfig config) : config_(config), m_(Vec::Zero(size)), v_(Vec::Zero(size)) {}

  void step(Vec& params, const Vec& grad);

  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  std::int64_t steps() const { return t_; }
  const Vec& first_moment() const { return m_; }
  const Vec& second_moment() const { return v_; }

  /// Restores moments from a checkpoint.
  void restore(std::int64_t t, Vec m, Vec v);

 private:
  AdamConfig config_;
  Vec m_;
  Vec v_;
  std::int64_t t_ = 0;
};

}  // namespace pcp::nn
