#include "cfmb/rl/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cfmb::rl {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::MatrixXd im2col(const MatrixXd& x, std::size_t H, std::size_t W, std::size_t k) {
  const auto C = static_cast<std::size_t>(x.rows());
  const std::size_t hw = H * W;
  const std::size_t B = static_cast<std::size_t>(x.cols()) / hw;
  const long pad = static_cast<long>(k / 2);
  MatrixXd cols = MatrixXd::Zero(static_cast<Eigen::Index>(C * k * k), static_cast<Eigen::Index>(B * hw));
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t xx = 0; xx < W; ++xx) {
        const auto n = static_cast<Eigen::Index>(b * hw + y * W + xx);
        for (std::size_t ky = 0; ky < k; ++ky) {
          const long sy = static_cast<long>(y + ky) - pad;
          if (sy < 0 || sy >= static_cast<long>(H)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long sx = static_cast<long>(xx + kx) - pad;
            if (sx < 0 || sx >= static_cast<long>(W)) continue;
            const auto src = static_cast<Eigen::Index>(b * hw + static_cast<std::size_t>(sy) * W + static_cast<std::size_t>(sx));
            for (std::size_t c = 0; c < C; ++c)
              cols(static_cast<Eigen::Index>(c * k * k + ky * k + kx), n) = x(static_cast<Eigen::Index>(c), src);
          }
        }
      }
    }
  }
  return cols;
}

Eigen::MatrixXd col2im(const MatrixXd& cols, std::size_t C, std::size_t H, std::size_t W, std::size_t k) {
  const std::size_t hw = H * W;
  const std::size_t B = static_cast<std::size_t>(cols.cols()) / hw;
  const long pad = static_cast<long>(k / 2);
  MatrixXd x = MatrixXd::Zero(static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(B * hw));
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t xx = 0; xx < W; ++xx) {
        const auto n = static_cast<Eigen::Index>(b * hw + y * W + xx);
        for (std::size_t ky = 0; ky < k; ++ky) {
          const long sy = static_cast<long>(y + ky) - pad;
          if (sy < 0 || sy >= static_cast<long>(H)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long sx = static_cast<long>(xx + kx) - pad;
            if (sx < 0 || sx >= static_cast<long>(W)) continue;
            const auto dst = static_cast<Eigen::Index>(b * hw + static_cast<std::size_t>(sy) * W + static_cast<std::size_t>(sx));
            for (std::size_t c = 0; c < C; ++c)
              x(static_cast<Eigen::Index>(c), dst) += cols(static_cast<Eigen::Index>(c * k * k + ky * k + kx), n);
          }
        }
      }
    }
  }
  return x;
}

void relu_inplace(MatrixXd& m) { m = m.cwiseMax(0.0); }

// Zeroes gradient entries where the forward activation was clipped.
void relu_backward(MatrixXd& grad, const MatrixXd& activated) {
  grad = (activated.array() > 0.0).select(grad, 0.0);
}

void init_uniform(AgentParams& p, std::size_t idx, double bound, Rng& rng) {
  std::uniform_real_distribution<double> d(-bound, bound);
  for (auto& v : p.tensor(idx).values) v = d(rng);
}

void init_const(AgentParams& p, std::size_t idx, double value) {
  for (auto& v : p.tensor(idx).values) v = value;
}

void add_noisy(AgentParams& p, const std::string& name, std::size_t in, std::size_t out, double sigma0, Rng& rng,
               std::size_t idx[4]) {
  idx[0] = p.add(name + ".mu_w", {out, in});
  idx[1] = p.add(name + ".sigma_w", {out, in});
  idx[2] = p.add(name + ".mu_b", {out});
  idx[3] = p.add(name + ".sigma_b", {out});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  init_uniform(p, idx[0], bound, rng);
  init_const(p, idx[1], sigma0 * bound);
  init_uniform(p, idx[2], bound, rng);
  init_const(p, idx[3], sigma0 * bound);
}

MatrixXd noisy_weight(const AgentParams& p, const std::size_t idx[4], const NoisyEps& eps) {
  MatrixXd w = p.matrix(idx[0]);
  if (eps.in.size() > 0) w.array() += p.matrix(idx[1]).array() * (eps.out * eps.in.transpose()).array();
  return w;
}

VectorXd noisy_bias(const AgentParams& p, const std::size_t idx[4], const NoisyEps& eps) {
  VectorXd b = p.vector(idx[2]);
  if (eps.out.size() > 0) b.array() += p.vector(idx[3]).array() * eps.out.array();
  return b;
}

// Returns dX; accumulates parameter gradients.
MatrixXd noisy_backward(const AgentParams& p, const std::size_t idx[4], const NoisyEps& eps, const MatrixXd& x,
                        const MatrixXd& dy, AgentParams& g) {
  const MatrixXd gw = dy * x.transpose();
  const VectorXd gb = dy.rowwise().sum();
  g.matrix(idx[0]) += gw;
  g.vector(idx[2]) += gb;
  if (eps.in.size() > 0) {
    g.matrix(idx[1]).array() += gw.array() * (eps.out * eps.in.transpose()).array();
    g.vector(idx[3]).array() += gb.array() * eps.out.array();
  }
  return noisy_weight(p, idx, eps).transpose() * dy;
}

double scaled_noise(Rng& rng) {
  const double e = std::normal_distribution<double>(0.0, 1.0)(rng);
  return (e < 0.0 ? -1.0 : 1.0) * std::sqrt(std::abs(e));
}

}  // namespace

Eigen::MatrixXd linear_forward(const AgentParams& p, std::size_t w, std::size_t b, const Eigen::MatrixXd& x) {
  if (p.matrix(w).cols() != x.rows()) throw std::invalid_argument("linear_forward: input size mismatch");
  MatrixXd y = p.matrix(w) * x;
  y.colwise() += p.vector(b);
  return y;
}

Eigen::MatrixXd noisy_forward(const AgentParams& p, const std::size_t idx[4], const Eigen::MatrixXd& x,
                              const NoisyEps& eps) {
  if (p.matrix(idx[0]).cols() != x.rows()) throw std::invalid_argument("noisy_forward: input size mismatch");
  MatrixXd y = noisy_weight(p, idx, eps) * x;
  y.colwise() += noisy_bias(p, idx, eps);
  return y;
}

Eigen::MatrixXd conv2d_forward(const AgentParams& p, std::size_t w, std::size_t b, const Eigen::MatrixXd& x,
                               std::size_t height, std::size_t width, std::size_t kernel, Eigen::MatrixXd* cols_out) {
  if (static_cast<std::size_t>(p.matrix(w).cols()) != static_cast<std::size_t>(x.rows()) * kernel * kernel)
    throw std::invalid_argument("conv2d_forward: channel mismatch");
  if (x.cols() % static_cast<Eigen::Index>(height * width) != 0)
    throw std::invalid_argument("conv2d_forward: spatial size mismatch");
  MatrixXd cols = im2col(x, height, width, kernel);
  MatrixXd y = p.matrix(w) * cols;
  y.colwise() += p.vector(b);
  if (cols_out) *cols_out = std::move(cols);
  return y;
}

Eigen::MatrixXd pack_observations(const std::vector<const std::vector<double>*>& obs, std::size_t channels,
                                  std::size_t hw) {
  MatrixXd x(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(obs.size() * hw));
  for (std::size_t b = 0; b < obs.size(); ++b) {
    if (obs[b]->size() != channels * hw) throw std::invalid_argument("pack_observations: observation size mismatch");
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < hw; ++i)
        x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * hw + i)) = (*obs[b])[c * hw + i];
  }
  return x;
}

RainbowNet::RainbowNet(const NetConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.kernel % 2 == 0) throw std::invalid_argument("RainbowNet: kernel must be odd");
  if (cfg.n_actions == 0 || cfg.n_atoms < 2) throw std::invalid_argument("RainbowNet: bad head size");
  const std::size_t kk = cfg.kernel * cfg.kernel;
  std::size_t cin = cfg.in_channels;
  for (std::size_t i = 0; i < cfg.conv_channels.size(); ++i) {
    const std::size_t cout = cfg.conv_channels[i];
    conv_w_.push_back(params_.add("conv" + std::to_string(i) + ".weight", {cout, cin * kk}));
    conv_b_.push_back(params_.add("conv" + std::to_string(i) + ".bias", {cout}));
    const double bound = 1.0 / std::sqrt(static_cast<double>(cin * kk));
    init_uniform(params_, conv_w_.back(), bound, rng);
    init_uniform(params_, conv_b_.back(), bound, rng);
    cin = cout;
  }
  const std::size_t flat = cin * cfg.height * cfg.width;
  enc_w_ = params_.add("encoder.weight", {cfg.hidden, flat});
  enc_b_ = params_.add("encoder.bias", {cfg.hidden});
  const double bound = 1.0 / std::sqrt(static_cast<double>(flat));
  init_uniform(params_, enc_w_, bound, rng);
  init_uniform(params_, enc_b_, bound, rng);

  add_noisy(params_, "value1", cfg.hidden, cfg.stream_hidden, cfg.noisy_sigma0, rng, v1_);
  add_noisy(params_, "value2", cfg.stream_hidden, cfg.n_atoms, cfg.noisy_sigma0, rng, v2_);
  add_noisy(params_, "advantage1", cfg.hidden, cfg.stream_hidden, cfg.noisy_sigma0, rng, a1_);
  add_noisy(params_, "advantage2", cfg.stream_hidden, cfg.n_actions * cfg.n_atoms, cfg.noisy_sigma0, rng, a2_);
  clear_noise();
}

void RainbowNet::sample_noise(Rng& rng) {
  const std::size_t* layers[4] = {v1_, v2_, a1_, a2_};
  noise_.resize(4);
  for (std::size_t l = 0; l < 4; ++l) {
    const auto rows = params_.matrix(layers[l][0]).rows();
    const auto cols = params_.matrix(layers[l][0]).cols();
    noise_[l].in.resize(cols);
    noise_[l].out.resize(rows);
    for (Eigen::Index i = 0; i < cols; ++i) noise_[l].in[i] = scaled_noise(rng);
    for (Eigen::Index i = 0; i < rows; ++i) noise_[l].out[i] = scaled_noise(rng);
  }
}

void RainbowNet::clear_noise() {
  noise_.assign(4, NoisyEps{});
}

Eigen::MatrixXd RainbowNet::encode_impl(const Eigen::MatrixXd& obs, Cache* cache) const {
  if (static_cast<std::size_t>(obs.rows()) != cfg_.in_channels)
    throw std::invalid_argument("RainbowNet: observation channel mismatch");
  const std::size_t hw = cfg_.height * cfg_.width;
  if (obs.cols() == 0 || obs.cols() % static_cast<Eigen::Index>(hw) != 0)
    throw std::invalid_argument("RainbowNet: observation spatial mismatch");
  const std::size_t B = static_cast<std::size_t>(obs.cols()) / hw;

  MatrixXd a = obs;
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    MatrixXd cols;
    MatrixXd y = conv2d_forward(params_, conv_w_[i], conv_b_[i], a, cfg_.height, cfg_.width, cfg_.kernel, &cols);
    relu_inplace(y);
    if (cache) {
      cache->cols.push_back(std::move(cols));
      cache->conv_out.push_back(y);
    }
    a = std::move(y);
  }
  const auto C = static_cast<std::size_t>(a.rows());
  MatrixXd flat(static_cast<Eigen::Index>(C * hw), static_cast<Eigen::Index>(B));
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t p = 0; p < hw; ++p)
        flat(static_cast<Eigen::Index>(c * hw + p), static_cast<Eigen::Index>(b)) =
            a(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * hw + p));
  MatrixXd h = linear_forward(params_, enc_w_, enc_b_, flat);
  relu_inplace(h);
  if (cache) {
    cache->batch = B;
    cache->flat = std::move(flat);
    cache->hidden = h;
  }
  return h;
}

Eigen::MatrixXd RainbowNet::encode(const Eigen::MatrixXd& obs) const { return encode_impl(obs, nullptr); }

Eigen::MatrixXd RainbowNet::forward(const Eigen::MatrixXd& obs, Cache* cache, Rng* dropout_rng) const {
  Cache local;
  Cache* c = cache ? cache : &local;
  *c = Cache{};
  MatrixXd h = encode_impl(obs, c);
  const std::size_t B = c->batch;
  if (dropout_rng && cfg_.dropout > 0.0) {
    const double keep = 1.0 - cfg_.dropout;
    c->drop_mask.resize(h.rows(), h.cols());
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      for (Eigen::Index i = 0; i < h.rows(); ++i) c->drop_mask(i, j) = uniform01(*dropout_rng) < keep ? 1.0 / keep : 0.0;
    h.array() *= c->drop_mask.array();
  }
  c->head_in = h;

  c->v1 = noisy_forward(params_, v1_, h, noise_[0]);
  relu_inplace(c->v1);
  const MatrixXd v = noisy_forward(params_, v2_, c->v1, noise_[1]);  // (atoms, B)
  c->a1 = noisy_forward(params_, a1_, h, noise_[2]);
  relu_inplace(c->a1);
  const MatrixXd adv = noisy_forward(params_, a2_, c->a1, noise_[3]);  // (A*atoms, B)

  const auto A = static_cast<Eigen::Index>(cfg_.n_actions);
  const auto N = static_cast<Eigen::Index>(cfg_.n_atoms);
  MatrixXd probs(N, static_cast<Eigen::Index>(B) * A);
  for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(B); ++b) {
    VectorXd mean = VectorXd::Zero(N);
    for (Eigen::Index a = 0; a < A; ++a) mean += adv.col(b).segment(a * N, N);
    mean /= static_cast<double>(A);
    for (Eigen::Index a = 0; a < A; ++a) {
      VectorXd logit = v.col(b) + adv.col(b).segment(a * N, N) - mean;
      const double mx = logit.maxCoeff();
      logit = (logit.array() - mx).exp();
      probs.col(b * A + a) = logit / logit.sum();
    }
  }
  c->probs = probs;
  return probs;
}

void RainbowNet::backward(const Cache& c, const Eigen::MatrixXd& dlogits, AgentParams& g) const {
  const auto A = static_cast<Eigen::Index>(cfg_.n_actions);
  const auto N = static_cast<Eigen::Index>(cfg_.n_atoms);
  const auto B = static_cast<Eigen::Index>(c.batch);
  if (dlogits.rows() != N || dlogits.cols() != B * A) throw std::invalid_argument("RainbowNet::backward: shape mismatch");

  MatrixXd dv = MatrixXd::Zero(N, B);
  MatrixXd dadv(A * N, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    VectorXd sum = VectorXd::Zero(N);
    for (Eigen::Index a = 0; a < A; ++a) sum += dlogits.col(b * A + a);
    dv.col(b) = sum;
    const VectorXd mean = sum / static_cast<double>(A);
    for (Eigen::Index a = 0; a < A; ++a) dadv.col(b).segment(a * N, N) = dlogits.col(b * A + a) - mean;
  }

  MatrixXd dv1 = noisy_backward(params_, v2_, noise_[1], c.v1, dv, g);
  relu_backward(dv1, c.v1);
  MatrixXd dh = noisy_backward(params_, v1_, noise_[0], c.head_in, dv1, g);
  MatrixXd da1 = noisy_backward(params_, a2_, noise_[3], c.a1, dadv, g);
  relu_backward(da1, c.a1);
  dh += noisy_backward(params_, a1_, noise_[2], c.head_in, da1, g);

  if (c.drop_mask.size() > 0) dh.array() *= c.drop_mask.array();
  relu_backward(dh, c.hidden);
  g.matrix(enc_w_) += dh * c.flat.transpose();
  g.vector(enc_b_) += dh.rowwise().sum();
  const MatrixXd dflat = params_.matrix(enc_w_).transpose() * dh;

  const std::size_t hw = cfg_.height * cfg_.width;
  if (conv_w_.empty()) return;
  const auto C = static_cast<std::size_t>(c.conv_out.back().rows());
  MatrixXd da(static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(c.batch * hw));
  for (std::size_t b = 0; b < c.batch; ++b)
    for (std::size_t ch = 0; ch < C; ++ch)
      for (std::size_t p = 0; p < hw; ++p)
        da(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(b * hw + p)) =
            dflat(static_cast<Eigen::Index>(ch * hw + p), static_cast<Eigen::Index>(b));

  for (std::size_t i = conv_w_.size(); i-- > 0;) {
    relu_backward(da, c.conv_out[i]);
    g.matrix(conv_w_[i]) += da * c.cols[i].transpose();
    g.vector(conv_b_[i]) += da.rowwise().sum();
    if (i == 0) break;
    const MatrixXd dcols = params_.matrix(conv_w_[i]).transpose() * da;
    da = col2im(dcols, static_cast<std::size_t>(c.conv_out[i - 1].rows()), cfg_.height, cfg_.width, cfg_.kernel);
  }
}

}  // namespace cfmb::rl
