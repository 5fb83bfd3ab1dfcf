#include "madrive/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "madrive/geom.hpp"

namespace madrive {

namespace {

// y = W x + b, W row-major (rows x cols)
void affine(const double* w, const double* b, const double* x, double* y,
            int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wr = w + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

void check_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite network input");
  }
}

}  // namespace

void Mlp::init_weights(Rng& rng, double output_scale) {
  auto xavier = [&](double* w, int rows, int cols) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    for (int i = 0; i < rows * cols; ++i) w[i] = rng.uniform(-bound, bound);
  };
  double* p = params_.data();
  xavier(p, spec_.hidden1, spec_.input_dim);
  p += spec_.hidden1 * spec_.input_dim + spec_.hidden1;  // biases stay 0
  xavier(p, spec_.hidden2, spec_.hidden1);
  p += spec_.hidden2 * spec_.hidden1 + spec_.hidden2;
  xavier(p, spec_.output_dim, spec_.hidden2);
  for (int i = 0; i < spec_.output_dim * spec_.hidden2; ++i) p[i] *= output_scale;
}

void Mlp::forward(std::span<const double> input, MlpWorkspace& ws) const {
  if (static_cast<int>(input.size()) != spec_.input_dim) {
    throw std::invalid_argument("network input dimension mismatch");
  }
  check_finite(input);
  ws.input.assign(input.begin(), input.end());
  ws.a1.resize(static_cast<size_t>(spec_.hidden1));
  ws.a2.resize(static_cast<size_t>(spec_.hidden2));
  ws.out.resize(static_cast<size_t>(spec_.output_dim));

  const double* w1 = params_.data();
  const double* b1 = w1 + spec_.hidden1 * spec_.input_dim;
  const double* w2 = b1 + spec_.hidden1;
  const double* b2 = w2 + spec_.hidden2 * spec_.hidden1;
  const double* w3 = b2 + spec_.hidden2;
  const double* b3 = w3 + spec_.output_dim * spec_.hidden2;

  affine(w1, b1, ws.input.data(), ws.a1.data(), spec_.hidden1, spec_.input_dim);
  for (double& v : ws.a1) v = std::tanh(v);
  affine(w2, b2, ws.a1.data(), ws.a2.data(), spec_.hidden2, spec_.hidden1);
  for (double& v : ws.a2) v = std::tanh(v);
  affine(w3, b3, ws.a2.data(), ws.out.data(), spec_.output_dim, spec_.hidden2);
}

void Mlp::backward(MlpWorkspace& ws, std::span<const double> dout,
                   std::vector<double>& grad) const {
  grad.resize(params_.size());
  double* g1 = grad.data();
  double* gb1 = g1 + spec_.hidden1 * spec_.input_dim;
  double* g2 = gb1 + spec_.hidden1;
  double* gb2 = g2 + spec_.hidden2 * spec_.hidden1;
  double* g3 = gb2 + spec_.hidden2;
  double* gb3 = g3 + spec_.output_dim * spec_.hidden2;

  const double* w2 = params_.data() + spec_.hidden1 * spec_.input_dim +
                     spec_.hidden1;
  const double* w3 = w2 + spec_.hidden2 * spec_.hidden1 + spec_.hidden2;

  // output layer
  for (int r = 0; r < spec_.output_dim; ++r) {
    const double d = dout[static_cast<size_t>(r)];
    gb3[r] += d;
    double* gr = g3 + static_cast<size_t>(r) * spec_.hidden2;
    for (int c = 0; c < spec_.hidden2; ++c) gr[c] += d * ws.a2[static_cast<size_t>(c)];
  }

  // hidden 2
  auto& d2 = ws.d2;
  d2.assign(static_cast<size_t>(spec_.hidden2), 0.0);
  for (int r = 0; r < spec_.output_dim; ++r) {
    const double d = dout[static_cast<size_t>(r)];
    const double* wr = w3 + static_cast<size_t>(r) * spec_.hidden2;
    for (int c = 0; c < spec_.hidden2; ++c) d2[static_cast<size_t>(c)] += d * wr[c];
  }
  for (int c = 0; c < spec_.hidden2; ++c) {
    const double a = ws.a2[static_cast<size_t>(c)];
    d2[static_cast<size_t>(c)] *= (1.0 - a * a);
  }
  for (int r = 0; r < spec_.hidden2; ++r) {
    const double d = d2[static_cast<size_t>(r)];
    gb2[r] += d;
    double* gr = g2 + static_cast<size_t>(r) * spec_.hidden1;
    for (int c = 0; c < spec_.hidden1; ++c) gr[c] += d * ws.a1[static_cast<size_t>(c)];
  }

  // hidden 1
  auto& d1 = ws.d1;
  d1.assign(static_cast<size_t>(spec_.hidden1), 0.0);
  for (int r = 0; r < spec_.hidden2; ++r) {
    const double d = d2[static_cast<size_t>(r)];
    const double* wr = w2 + static_cast<size_t>(r) * spec_.hidden1;
    for (int c = 0; c < spec_.hidden1; ++c) d1[static_cast<size_t>(c)] += d * wr[c];
  }
  for (int c = 0; c < spec_.hidden1; ++c) {
    const double a = ws.a1[static_cast<size_t>(c)];
    d1[static_cast<size_t>(c)] *= (1.0 - a * a);
  }
  for (int r = 0; r < spec_.hidden1; ++r) {
    const double d = d1[static_cast<size_t>(r)];
    gb1[r] += d;
    double* gr = g1 + static_cast<size_t>(r) * spec_.input_dim;
    for (int c = 0; c < spec_.input_dim; ++c) {
      gr[c] += d * ws.input[static_cast<size_t>(c)];
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

double log_sum_exp(std::span<const double> logits) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - max_logit);
  return max_logit + std::log(sum);
}

void AdamOptimizer::step(std::vector<double>& params,
                         const std::vector<double>& grad) {
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

double clip_grad_norm(std::vector<double>& grad, double max_norm) {
  double norm_sq = 0.0;
  for (double g : grad) norm_sq += g * g;
  const double norm = std::sqrt(norm_sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

void RunningNorm::update(std::span<const double> x) {
  count_ += 1.0;
  for (size_t i = 0; i < mean_.size(); ++i) {
    const double delta = x[i] - mean_[i];
    mean_[i] += delta / count_;
    m2_[i] += delta * (x[i] - mean_[i]);
  }
}

void RunningNorm::normalize(std::span<const double> x,
                            std::span<double> out) const {
  for (size_t i = 0; i < mean_.size(); ++i) {
    const double var = count_ > 0.0 ? m2_[i] / count_ : 1.0;
    const double z = (x[i] - mean_[i]) / std::sqrt(var + 1e-8);
    out[i] = clamp(z, -10.0, 10.0);
  }
}

std::vector<double> RunningNorm::normalized(std::span<const double> x) const {
  std::vector<double> out(x.size());
  normalize(x, out);
  return out;
}

void RunningNorm::restore(double count, std::vector<double> mean,
                          std::vector<double> m2) {
  count_ = count;
  mean_ = std::move(mean);
  m2_ = std::move(m2);
}

}  // namespace madrive
