#include "cfmb/rl/distributional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfmb::rl {

Support::Support(double lo, double hi, std::size_t n) : vmin(lo), vmax(hi), n_atoms(n) {
  if (n < 2) throw std::invalid_argument("Support: need at least two atoms");
  if (!(hi > lo)) throw std::invalid_argument("Support: vmax must exceed vmin");
}

std::vector<double> Support::atoms() const {
  std::vector<double> z(n_atoms);
  for (std::size_t i = 0; i < n_atoms; ++i) z[i] = atom(i);
  return z;
}

double ValueDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) m += atoms[i] * probs[i];
  return m;
}

std::vector<double> project_shifted(std::span<const double> shifted_atoms, std::span<const double> probs,
                                    const Support& support) {
  if (shifted_atoms.size() != probs.size()) throw std::invalid_argument("project_shifted: size mismatch");
  std::vector<double> out(support.n_atoms, 0.0);
  const double dz = support.delta();
  const auto last = static_cast<double>(support.n_atoms - 1);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double tz = std::clamp(shifted_atoms[j], support.vmin, support.vmax);
    const double b = std::clamp((tz - support.vmin) / dz, 0.0, last);
    const double lo = std::floor(b);
    const double hi = std::ceil(b);
    const auto l = static_cast<std::size_t>(lo);
    const auto u = static_cast<std::size_t>(hi);
    if (l == u) {
      out[l] += probs[j];
    } else {
      out[l] += probs[j] * (hi - b);
      out[u] += probs[j] * (b - lo);
    }
  }
  return out;
}

std::vector<double> categorical_project(double reward, double discount, std::span<const double> probs,
                                        const Support& support) {
  if (probs.size() != support.n_atoms) throw std::invalid_argument("categorical_project: size mismatch");
  std::vector<double> shifted(support.n_atoms);
  for (std::size_t i = 0; i < support.n_atoms; ++i) shifted[i] = reward + discount * support.atom(i);
  return project_shifted(shifted, probs, support);
}

double kl_loss(std::span<const double> estimate, std::span<const double> target) {
  if (estimate.size() != target.size()) throw std::invalid_argument("kl_loss: support mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] <= 0.0) continue;
    loss += target[i] * (std::log(target[i]) - std::log(std::max(estimate[i], 1e-12)));
  }
  return std::max(loss, 0.0);
}

double kl_loss(const ValueDistribution& estimate, const ValueDistribution& target) {
  if (estimate.atoms != target.atoms) throw std::invalid_argument("kl_loss: support mismatch");
  return kl_loss(estimate.probs, target.probs);
}

Eigen::MatrixXd dueling_aggregate(const Eigen::VectorXd& value, const Eigen::MatrixXd& advantages) {
  if (advantages.cols() != value.size()) throw std::invalid_argument("dueling_aggregate: atom count mismatch");
  const Eigen::RowVectorXd mean = advantages.colwise().mean();
  Eigen::MatrixXd q = advantages;
  q.rowwise() += value.transpose() - mean;
  return q;
}

double multistep_return(std::span<const double> rewards, std::size_t n, double gamma) {
  if (n == 0) throw std::invalid_argument("multistep_return: n must be at least 1");
  double g = 0.0, w = 1.0;
  for (std::size_t k = 0; k < std::min(n, rewards.size()); ++k) {
    g += w * rewards[k];
    w *= gamma;
  }
  return g;
}

std::vector<double> boltzmann_probs(std::span<const double> q, double beta, double sign) {
  if (q.empty()) throw std::invalid_argument("boltzmann_probs: no actions");
  if (beta < 0.0) throw std::invalid_argument("boltzmann_probs: beta must be non-negative");
  std::vector<double> p(q.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i])) throw std::invalid_argument("boltzmann_probs: non-finite value");
    p[i] = sign * beta * q[i];
    mx = std::max(mx, p[i]);
  }
  double s = 0.0;
  for (auto& x : p) s += (x = std::exp(x - mx));
  for (auto& x : p) x /= s;
  return p;
}

std::size_t boltzmann_sample(std::span<const double> q, double beta, Rng& rng, double sign) {
  const auto p = boltzmann_probs(q, beta, sign);
  const double u = uniform01(rng);
  double c = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    c += p[i];
    if (u < c) return i;
  }
  // Round-off: fall back to the last action with positive mass.
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return i;
  return 0;
}

std::size_t greedy_action(std::span<const double> expectations) {
  if (expectations.empty()) throw std::invalid_argument("greedy_action: no actions");
  std::size_t best = 0;
  for (std::size_t i = 1; i < expectations.size(); ++i)
    if (expectations[i] > expectations[best]) best = i;
  return best;
}

std::size_t greedy_action(std::span<const ValueDistribution> distributions) {
  std::vector<double> e;
  e.reserve(distributions.size());
  for (const auto& d : distributions) e.push_back(d.mean());
  return greedy_action(e);
}

void softmax_inplace(Eigen::Ref<Eigen::VectorXd> x) {
  const double mx = x.maxCoeff();
  x = (x.array() - mx).exp();
  x /= x.sum();
}

}  // namespace cfmb::rl
