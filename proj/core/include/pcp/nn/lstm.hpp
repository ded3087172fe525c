#pragma once

// Batched LSTM and dense layers over flat parameter buffers. Columns of every
// activation matrix are batch entries; rows are features.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "pcp/rng.hpp"

namespace pcp::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;
using VecMap = Eigen::Map<Vec>;
using ConstVecMap = Eigen::Map<const Vec>;

struct LstmState {
  Mat h;
  Mat c;

  static LstmState zeros(int hidden, int batch) { return {Mat::Zero(hidden, batch), Mat::Zero(hidden, batch)}; }
};

/// Activations recorded by a sequence forward pass.
struct LstmTape {
  std::vector<Mat> x;
  std::vector<Mat> h_prev;
  std::vector<Mat> c_prev;
  std::vector<Mat> gates;  // post-activation [i; f; g; o], 4H x B
  std::vector<Mat> tanh_c;
  std::vector<Mat> h;
};

/// Gate order in the stacked weights is input, forget, cell, output.
class LstmLayer {
 public:
  LstmLayer() = default;
  LstmLayer(int input, int hidden) : input_(input), hidden_(hidden) {}

  int input() const { return input_; }
  int hidden() const { return hidden_; }
  std::size_t size() const {
    return static_cast<std::size_t>(4 * hidden_) * (input_ + hidden_ + 1);
  }

  ConstMatMap w_x(const double* p) const { return {p, 4 * hidden_, input_}; }
  ConstMatMap w_h(const double* p) const { return {p + 4 * hidden_ * input_, 4 * hidden_, hidden_}; }
  ConstVecMap bias(const double* p) const { return {p + 4 * hidden_ * (input_ + hidden_), 4 * hidden_}; }

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) for every parameter.
  void init(double* p, Rng& rng) const;

  /// One inference step; updates `state` in place.
  void step(const double* p, const Mat& x, LstmState& state) const;

  void forward(const double* p, std::span<const Mat> xs, const LstmState& initial, LstmTape& tape) const;

  /// Backpropagates `dh` (gradient w.r.t. each h_t) through time. Parameter
  /// gradients are accumulated into `grad`.
  void backward(const double* p, const LstmTape& tape, std::span<const Mat> dh, double* grad) const;

 private:
  void cell(const double* p, const Mat& x, const Mat& h_prev, const Mat& c_prev, Mat& gates, Mat& c, Mat& tanh_c,
            Mat& h) const;

  int input_ = 0;
  int hidden_ = 0;
};

/// y = W x + b
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(int input, int output) : input_(input), output_(output) {}

  int input() const { return input_; }
  int output() const { return output_; }
  std::size_t size() const { return static_cast<std::size_t>(output_) * (input_ + 1); }

  ConstMatMap weight(const double* p) const { return {p, output_, input_}; }
  ConstVecMap bias(const double* p) const { return {p + output_ * input_, output_}; }

  void init(double* p, Rng& rng, double scale) const;
  void zero(double* p) const;

  Mat forward(const double* p, const Mat& x) const;

  /// Accumulates parameter gradients into `grad`; returns dL/dx.
  Mat backward(const double* p, const Mat& x, const Mat& dy, double* grad) const;

 private:
  int input_ = 0;
  int output_ = 0;
};

double sigmoid(double z);

/// Scales `grad` so its L2 norm is at most `max_norm`; returns the pre-clip norm.
double clip_grad_norm(Vec& grad, double max_norm);

}  // namespace pcp::nn
