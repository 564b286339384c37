#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cfmb/random.hpp"

namespace cfmb::rl {

/// Uniform atom grid on [vmin, vmax].
struct Support {
  double vmin = 0.0;
  double vmax = 1.0;
  std::size_t n_atoms = 21;

  Support() = default;
  Support(double lo, double hi, std::size_t n);
  double delta() const { return n_atoms > 1 ? (vmax - vmin) / static_cast<double>(n_atoms - 1) : 0.0; }
  double atom(std::size_t i) const { return vmin + delta() * static_cast<double>(i); }
  std::vector<double> atoms() const;
};

struct ValueDistribution {
  std::vector<double> atoms;
  std::vector<double> probs;

  double mean() const;
};

/// Projects masses sitting at arbitrary `shifted_atoms` onto `support`,
/// splitting each linearly between its two nearest atoms after clipping.
std::vector<double> project_shifted(std::span<const double> shifted_atoms, std::span<const double> probs,
                                    const Support& support);

/// Projection of r + discount * z for the distribution `probs` on `support`.
std::vector<double> categorical_project(double reward, double discount, std::span<const double> probs,
                                        const Support& support);

/// KL(target || estimate), estimate floored at 1e-12.
double kl_loss(std::span<const double> estimate, std::span<const double> target);
double kl_loss(const ValueDistribution& estimate, const ValueDistribution& target);

/// q[a] = v + adv[a] - mean(adv), per atom. adv is (actions x atoms).
Eigen::MatrixXd dueling_aggregate(const Eigen::VectorXd& value, const Eigen::MatrixXd& advantages);

/// sum_{k < n} gamma^k r_k, truncated when fewer rewards remain.
double multistep_return(std::span<const double> rewards, std::size_t n, double gamma);

/// Action probabilities proportional to exp(sign * beta * q).
std::vector<double> boltzmann_probs(std::span<const double> q, double beta, double sign = 1.0);
std::size_t boltzmann_sample(std::span<const double> q, double beta, Rng& rng, double sign = 1.0);

/// Argmax of expectations, lowest index on ties.
std::size_t greedy_action(std::span<const double> expectations);
std::size_t greedy_action(std::span<const ValueDistribution> distributions);

/// Numerically stable softmax of one column.
void softmax_inplace(Eigen::Ref<Eigen::VectorXd> x);

}  // namespace cfmb::rl
