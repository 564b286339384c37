#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cfmb/random.hpp"
#include "cfmb/rl/params.hpp"

namespace cfmb::rl {

struct NetConfig {
  std::size_t in_channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::vector<std::size_t> conv_channels{16, 32, 32, 32, 32};
  std::size_t kernel = 3;  // odd, stride 1, same padding
  std::size_t hidden = 128;
  std::size_t stream_hidden = 128;
  std::size_t n_actions = 1;
  std::size_t n_atoms = 21;
  double noisy_sigma0 = 0.5;
  double dropout = 0.2;

  std::size_t obs_size() const { return in_channels * height * width; }
};

/// Factorized Gaussian noise for one noisy layer: f(eps) = sign(eps) sqrt|eps|
/// already applied.
struct NoisyEps {
  Eigen::VectorXd in;
  Eigen::VectorXd out;
};

/// Dense layer y = W x + b on column batches; W is (out x in).
Eigen::MatrixXd linear_forward(const AgentParams& p, std::size_t w, std::size_t b, const Eigen::MatrixXd& x);

/// (mu_w + sigma_w * eps_out eps_in^T) x + (mu_b + sigma_b * eps_out).
/// Parameter indices in the order mu_w, sigma_w, mu_b, sigma_b.
Eigen::MatrixXd noisy_forward(const AgentParams& p, const std::size_t idx[4], const Eigen::MatrixXd& x,
                              const NoisyEps& eps);

/// Same-padded stride-1 convolution. Input is (C_in, B*H*W), one column per
/// pixel, images contiguous. Kernel tensor is (C_out, C_in*k*k).
Eigen::MatrixXd conv2d_forward(const AgentParams& p, std::size_t w, std::size_t b, const Eigen::MatrixXd& x,
                               std::size_t height, std::size_t width, std::size_t kernel,
                               Eigen::MatrixXd* cols_out = nullptr);

/// Packs per-sample observations (each C*H*W, channel-major) into the
/// (C, B*H*W) layout used by the convolutions.
Eigen::MatrixXd pack_observations(const std::vector<const std::vector<double>*>& obs, std::size_t channels,
                                  std::size_t hw);

/// Convolutional encoder followed by dueling noisy distributional heads.
class RainbowNet {
 public:
  RainbowNet() = default;
  RainbowNet(const NetConfig& cfg, Rng& init_rng);

  const NetConfig& config() const { return cfg_; }
  AgentParams& params() { return params_; }
  const AgentParams& params() const { return params_; }

  void sample_noise(Rng& rng);
  void clear_noise();
  const std::vector<NoisyEps>& noise() const { return noise_; }
  void set_noise(std::vector<NoisyEps> n) { noise_ = std::move(n); }

  struct Cache {
    std::size_t batch = 0;
    std::vector<Eigen::MatrixXd> cols;      // im2col of each conv input
    std::vector<Eigen::MatrixXd> conv_out;  // post-activation
    Eigen::MatrixXd flat;
    Eigen::MatrixXd hidden;    // post-activation
    Eigen::MatrixXd drop_mask; // empty when dropout is off
    Eigen::MatrixXd head_in;
    Eigen::MatrixXd v1, a1;    // post-activation stream hiddens
    Eigen::MatrixXd probs;     // (atoms, B*A)
  };

  /// Deterministic encoder output (hidden, B); no dropout.
  Eigen::MatrixXd encode(const Eigen::MatrixXd& obs) const;

  /// Per-action categorical probabilities, (atoms, B*A) with column b*A + a.
  /// Dropout is applied only when `dropout_rng` is given.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& obs, Cache* cache = nullptr, Rng* dropout_rng = nullptr) const;

  /// Accumulates parameter gradients for dL/dlogits into `grads`.
  void backward(const Cache& cache, const Eigen::MatrixXd& dlogits, AgentParams& grads) const;

 private:
  Eigen::MatrixXd encode_impl(const Eigen::MatrixXd& obs, Cache* cache) const;

  NetConfig cfg_;
  AgentParams params_;
  std::vector<std::size_t> conv_w_, conv_b_;
  std::size_t enc_w_ = 0, enc_b_ = 0;
  std::size_t v1_[4]{}, v2_[4]{}, a1_[4]{}, a2_[4]{};
  std::vector<NoisyEps> noise_;  // v1, v2, a1, a2
};

}  // namespace cfmb::rl
