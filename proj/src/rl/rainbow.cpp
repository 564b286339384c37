#include "cfmb/rl/rainbow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfmb/errors.hpp"

namespace cfmb::rl {

double distributional_loss(const RainbowNet& net, const Eigen::MatrixXd& obs,
                           const std::vector<std::vector<std::uint32_t>>& actions,
                           const std::vector<std::vector<double>>& targets, std::span<const double> weights,
                           AgentParams* grads, std::vector<double>* per_sample, Rng* dropout_rng) {
  RainbowNet::Cache cache;
  const Eigen::MatrixXd probs = net.forward(obs, &cache, dropout_rng);
  const auto A = static_cast<Eigen::Index>(net.config().n_actions);
  const auto N = static_cast<Eigen::Index>(net.config().n_atoms);
  const std::size_t B = cache.batch;
  if (actions.size() != B || targets.size() != B || weights.size() != B)
    throw std::invalid_argument("distributional_loss: batch size mismatch");

  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(N, static_cast<Eigen::Index>(B) * A);
  if (per_sample) per_sample->assign(B, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    if (actions[b].empty()) throw std::invalid_argument("distributional_loss: sample without actions");
    const auto& m = targets[b];
    const double share = 1.0 / static_cast<double>(actions[b].size());
    double kl = 0.0;
    for (auto a : actions[b]) {
      if (a >= static_cast<std::uint32_t>(A)) throw std::invalid_argument("distributional_loss: action out of range");
      const auto col = static_cast<Eigen::Index>(b) * A + static_cast<Eigen::Index>(a);
      std::vector<double> est(probs.col(col).data(), probs.col(col).data() + N);
      kl += share * kl_loss(est, m);
      for (Eigen::Index i = 0; i < N; ++i)
        dlogits(i, col) += weights[b] * share * (probs(i, col) - m[static_cast<std::size_t>(i)]) / static_cast<double>(B);
    }
    if (per_sample) (*per_sample)[b] = kl;
    total += weights[b] * kl;
  }
  if (grads) net.backward(cache, dlogits, *grads);
  return total / static_cast<double>(B);
}

RainbowAgent::RainbowAgent(const RainbowConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      support_(cfg.support()),
      replay_(cfg.replay_capacity, cfg.priority_alpha),
      act_rng_(make_rng(seed, {1})),
      train_rng_(make_rng(seed, {2})) {
  Rng init = make_rng(seed, {0});
  online_ = RainbowNet(cfg.net, init);
  target_ = online_;
  adam_ = AdamState(online_.params());
}

Eigen::MatrixXd RainbowAgent::distributions(const std::vector<double>& obs, bool explore) {
  if (explore) {
    online_.sample_noise(act_rng_);
  } else {
    online_.clear_noise();
  }
  const auto hw = cfg_.net.height * cfg_.net.width;
  const Eigen::MatrixXd x = pack_observations({&obs}, cfg_.net.in_channels, hw);
  return online_.forward(x);
}

std::vector<double> RainbowAgent::q_values(const std::vector<double>& obs, bool explore) {
  const Eigen::MatrixXd p = distributions(obs, explore);
  std::vector<double> q(static_cast<std::size_t>(p.cols()), 0.0);
  for (Eigen::Index a = 0; a < p.cols(); ++a)
    for (Eigen::Index i = 0; i < p.rows(); ++i) q[static_cast<std::size_t>(a)] += p(i, a) * support_.atom(static_cast<std::size_t>(i));
  return q;
}

Eigen::VectorXd RainbowAgent::hidden(const std::vector<double>& obs) const {
  const auto hw = cfg_.net.height * cfg_.net.width;
  return online_.encode(pack_observations({&obs}, cfg_.net.in_channels, hw)).col(0);
}

double RainbowAgent::current_beta() const {
  if (cfg_.beta_anneal_steps == 0) return cfg_.beta_end;
  const double f = std::min(1.0, static_cast<double>(updates_) / static_cast<double>(cfg_.beta_anneal_steps));
  return cfg_.beta_start + f * (cfg_.beta_end - cfg_.beta_start);
}

std::optional<double> RainbowAgent::train_step() {
  if (replay_.size() < std::max<std::size_t>(1, cfg_.learn_start)) return std::nullopt;
  const auto batch = replay_.sample(cfg_.batch_size, current_beta(), train_rng_);
  const std::size_t B = batch.indices.size();
  const auto hw = cfg_.net.height * cfg_.net.width;
  const auto A = static_cast<Eigen::Index>(cfg_.net.n_actions);
  const auto N = static_cast<Eigen::Index>(cfg_.net.n_atoms);

  std::vector<const std::vector<double>*> obs, next;
  std::vector<std::vector<std::uint32_t>> actions;
  for (auto i : batch.indices) {
    const auto& t = replay_.at(i);
    obs.push_back(&t.obs);
    next.push_back(&t.next_obs);
    actions.push_back(t.actions);
  }
  const Eigen::MatrixXd x = pack_observations(obs, cfg_.net.in_channels, hw);
  const Eigen::MatrixXd xn = pack_observations(next, cfg_.net.in_channels, hw);

  online_.sample_noise(train_rng_);
  target_.sample_noise(train_rng_);
  const Eigen::MatrixXd p_target = target_.forward(xn);
  const Eigen::MatrixXd p_select = cfg_.double_q ? online_.forward(xn) : p_target;
  const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(support_.atoms().data(), N);

  std::vector<std::vector<double>> targets(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& t = replay_.at(batch.indices[b]);
    const auto base = static_cast<Eigen::Index>(b) * A;
    Eigen::Index best = 0;
    double best_q = -1e300;
    for (Eigen::Index a = 0; a < A; ++a) {
      const double q = p_select.col(base + a).dot(z);
      if (q > best_q) {
        best_q = q;
        best = a;
      }
    }
    std::vector<double> pn(p_target.col(base + best).data(), p_target.col(base + best).data() + N);
    targets[b] = categorical_project(t.reward, t.done ? 0.0 : t.discount, pn, support_);
  }

  AgentParams grads = online_.params().zeros_like();
  std::vector<double> per_sample;
  const double loss =
      distributional_loss(online_, x, actions, targets, batch.weights, &grads, &per_sample, &train_rng_);
  grad_step(online_.params(), grads, adam_, cfg_.adam);
  for (std::size_t b = 0; b < B; ++b) replay_.update_priority(batch.indices[b], per_sample[b]);

  ++updates_;
  if (cfg_.target_sync > 0 && updates_ % cfg_.target_sync == 0) sync_target();
  return loss;
}

void RainbowAgent::set_params(const AgentParams& p) {
  if (!p.same_layout(online_.params())) throw StructuralError("RainbowAgent: parameter layout mismatch");
  online_.params() = p;
}

void RainbowAgent::set_target_params(const AgentParams& p) {
  if (!p.same_layout(target_.params())) throw StructuralError("RainbowAgent: parameter layout mismatch");
  target_.params() = p;
}

}  // namespace cfmb::rl
