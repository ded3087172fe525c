#include "pcp/nn/adam.hpp"

#include <cmath>

#include "pcp/errors.hpp"

namespace pcp::nn {

void Adam::step(Vec& params, const Vec& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw StateError("Adam: parameter size mismatch");
  }
  ++t_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const double step = config_.learning_rate * std::sqrt(bc2) / bc1;
  params.array() -= step * m_.array() / (v_.array().sqrt() + config_.epsilon);
}

void Adam::restore(std::int64_t t, Vec m, Vec v) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw RuntimeFailure("Adam: restored moments have wrong size");
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace pcp::nn
