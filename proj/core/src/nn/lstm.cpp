#include "pcp/nn/lstm.hpp"

#include <cmath>

namespace pcp::nn {

namespace {

Mat sigmoid_of(const Mat& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void LstmLayer::init(double* p, Rng& rng) const {
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (std::size_t i = 0; i < size(); ++i) p[i] = rng.uniform(-k, k);
}

void LstmLayer::cell(const double* p, const Mat& x, const Mat& h_prev, const Mat& c_prev, Mat& gates, Mat& c,
                     Mat& tanh_c, Mat& h) const {
  const int H = hidden_;
  gates.noalias() = w_x(p) * x;
  gates.noalias() += w_h(p) * h_prev;
  gates.colwise() += bias(p);
  gates.topRows(2 * H) = sigmoid_of(gates.topRows(2 * H));
  gates.middleRows(2 * H, H) = gates.middleRows(2 * H, H).array().tanh().matrix();
  gates.bottomRows(H) = sigmoid_of(gates.bottomRows(H));
  const auto i = gates.topRows(H).array();
  const auto f = gates.middleRows(H, H).array();
  const auto g = gates.middleRows(2 * H, H).array();
  const auto o = gates.bottomRows(H).array();
  c = (f * c_prev.array() + i * g).matrix();
  tanh_c = c.array().tanh().matrix();
  h = (o * tanh_c.array()).matrix();
}

void LstmLayer::step(const double* p, const Mat& x, LstmState& state) const {
  Mat gates(4 * hidden_, x.cols());
  Mat c, tanh_c, h;
  cell(p, x, state.h, state.c, gates, c, tanh_c, h);
  state.h = std::move(h);
  state.c = std::move(c);
}

void LstmLayer::forward(const double* p, std::span<const Mat> xs, const LstmState& initial, LstmTape& tape) const {
  const std::size_t T = xs.size();
  const Eigen::Index B = initial.h.cols();
  tape.x.assign(xs.begin(), xs.end());
  tape.h_prev.resize(T);
  tape.c_prev.resize(T);
  tape.gates.resize(T);
  tape.tanh_c.resize(T);
  tape.h.resize(T);
  Mat h = initial.h;
  Mat c = initial.c;
  for (std::size_t t = 0; t < T; ++t) {
    tape.h_prev[t] = h;
    tape.c_prev[t] = c;
    tape.gates[t].resize(4 * hidden_, B);
    cell(p, xs[t], tape.h_prev[t], tape.c_prev[t], tape.gates[t], c, tape.tanh_c[t], h);
    tape.h[t] = h;
  }
}

void LstmLayer::backward(const double* p, const LstmTape& tape, std::span<const Mat> dh, double* grad) const {
  const int H = hidden_;
  const std::size_t T = tape.h.size();
  if (T == 0) return;
  const Eigen::Index B = tape.h[0].cols();
  MatMap g_wx(grad, 4 * H, input_);
  MatMap g_wh(grad + 4 * H * input_, 4 * H, H);
  VecMap g_b(grad + 4 * H * (input_ + H), 4 * H);

  Mat dh_next = Mat::Zero(H, B);
  Mat dc_next = Mat::Zero(H, B);
  Mat dz(4 * H, B);
  for (std::size_t s = T; s-- > 0;) {
    const Mat& gates = tape.gates[s];
    const auto i = gates.topRows(H).array();
    const auto f = gates.middleRows(H, H).array();
    const auto g = gates.middleRows(2 * H, H).array();
    const auto o = gates.bottomRows(H).array();
    const auto tc = tape.tanh_c[s].array();

    const Mat dh_t = dh[s] + dh_next;
    const Mat dc = (dh_t.array() * o * (1.0 - tc.square()) + dc_next.array()).matrix();

    dz.topRows(H) = (dc.array() * g * i * (1.0 - i)).matrix();
    dz.middleRows(H, H) = (dc.array() * tape.c_prev[s].array() * f * (1.0 - f)).matrix();
    dz.middleRows(2 * H, H) = (dc.array() * i * (1.0 - g.square())).matrix();
    dz.bottomRows(H) = (dh_t.array() * tc * o * (1.0 - o)).matrix();

    g_wx.noalias() += dz * tape.x[s].transpose();
    g_wh.noalias() += dz * tape.h_prev[s].transpose();
    g_b += dz.rowwise().sum();

    dh_next.noalias() = w_h(p).transpose() * dz;
    dc_next = (dc.array() * f).matrix();
  }
}

void DenseLayer::init(double* p, Rng& rng, double scale) const {
  const double k = scale / std::sqrt(static_cast<double>(input_));
  for (int i = 0; i < output_ * input_; ++i) p[i] = rng.uniform(-k, k);
  for (int i = 0; i < output_; ++i) p[output_ * input_ + i] = 0.0;
}

void DenseLayer::zero(double* p) const {
  for (std::size_t i = 0; i < size(); ++i) p[i] = 0.0;
}

Mat DenseLayer::forward(const double* p, const Mat& x) const {
  Mat y = weight(p) * x;
  y.colwise() += bias(p);
  return y;
}

Mat DenseLayer::backward(const double* p, const Mat& x, const Mat& dy, double* grad) const {
  MatMap g_w(grad, output_, input_);
  VecMap g_b(grad + output_ * input_, output_);
  g_w.noalias() += dy * x.transpose();
  g_b += dy.rowwise().sum();
  return weight(p).transpose() * dy;
}

double clip_grad_norm(Vec& grad, double max_norm) {
  const double norm = grad.norm();
  if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
  return norm;
}

}  // namespace pcp::nn
