#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "madrive/rng.hpp"

namespace madrive {

// feed-forward network: input -> 64 tanh -> 64 tanh -> output (linear),
// parameters stored as one flat vector [W1 b1 W2 b2 W3 b3], W row-major
struct MlpSpec {
  int input_dim = 0;
  int hidden1 = 64;
  int hidden2 = 64;
  int output_dim = 0;

  int param_count() const {
    return hidden1 * input_dim + hidden1 + hidden2 * hidden1 + hidden2 +
           output_dim * hidden2 + output_dim;
  }
  bool operator==(const MlpSpec&) const = default;
};

// per-sample forward activations kept for the backward pass
struct MlpWorkspace {
  std::vector<double> a1;   // tanh(z1)
  std::vector<double> a2;   // tanh(z2)
  std::vector<double> out;  // linear output
  std::vector<double> d1;   // scratch for backward
  std::vector<double> d2;
  std::vector<double> input;
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec) : spec_(spec) {
    params_.assign(static_cast<size_t>(spec_.param_count()), 0.0);
  }

  const MlpSpec& spec() const { return spec_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Xavier-uniform hidden layers; output layer scaled by output_scale
  void init_weights(Rng& rng, double output_scale);

  // writes logits/value into ws.out and caches activations in ws
  void forward(std::span<const double> input, MlpWorkspace& ws) const;

  // accumulates dL/dparams into grad given dL/dout; requires the ws of the
  // matching forward call (d1/d2 are scratch)
  void backward(MlpWorkspace& ws, std::span<const double> dout,
                std::vector<double>& grad) const;

 private:
  MlpSpec spec_;
  std::vector<double> params_;
};

// softmax with max subtraction; returns probabilities
std::vector<double> softmax(std::span<const double> logits);
double log_sum_exp(std::span<const double> logits);

struct AdamOptimizer {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  explicit AdamOptimizer(size_t n = 0, double learning_rate = 1e-3)
      : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad);
};

// clip gradient to a maximum global L2 norm; returns the pre-clip norm
double clip_grad_norm(std::vector<double>& grad, double max_norm);

// Welford running mean/variance; normalization clips at +-10
class RunningNorm {
 public:
  RunningNorm() = default;
  explicit RunningNorm(int dim)
      : mean_(static_cast<size_t>(dim), 0.0),
        m2_(static_cast<size_t>(dim), 0.0) {}

  void update(std::span<const double> x);
  void normalize(std::span<const double> x, std::span<double> out) const;
  std::vector<double> normalized(std::span<const double> x) const;

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& m2() const { return m2_; }
  void restore(double count, std::vector<double> mean, std::vector<double> m2);

 private:
  double count_ = 0.0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace madrive
