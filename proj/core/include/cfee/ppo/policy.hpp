#ifndef CFEE_PPO_POLICY_HPP_
#define CFEE_PPO_POLICY_HPP_

#include <array>
#include <string>

#include "cfee/alloc.hpp"
#include "cfee/ppo/mlp.hpp"

namespace cfee::ppo {

/// Which of (zeta, kappa, nu) the agent controls; the rest stay pinned.
struct ActionSpace {
  alloc::ActionBounds bounds;
  std::array<bool, 3> free{true, true, true};
  alloc::Action pinned{1.0, 0.0, 1.0};

  int dim() const;
  double lo(int coord) const;
  double hi(int coord) const;

  /// Maps a squashed vector over the free coordinates to a full Action.
  alloc::Action to_action(const Eigen::VectorXd& squashed) const;

  static ActionSpace proposed(const alloc::ActionBounds& b);
  /// zeta pinned to 1: all APs on.
  static ActionSpace all_aps(const alloc::ActionBounds& b);
  /// kappa = 0, nu = 1 pinned: only AP activation is learned.
  static ActionSpace activation_only(const alloc::ActionBounds& b);
};

/// Bounded squash lo + (hi - lo) * sigmoid(u) per free coordinate.
Eigen::VectorXd squash(const ActionSpace& space, const Eigen::VectorXd& raw);

/// log |d squash / d raw| summed over coordinates.
double squash_log_jacobian(const ActionSpace& space,
                           const Eigen::VectorXd& raw);

/// Diagonal Gaussian log-density of raw under (mean, exp(log_std)).
double gaussian_log_prob(const Eigen::VectorXd& raw,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std);

struct PolicySample {
  Eigen::VectorXd raw;
  Eigen::VectorXd squashed;
  alloc::Action action;
  double log_prob = 0.0;  // density of the squashed action
};

/// Gaussian policy with a state-independent log-std, squashed into bounds.
struct GaussianPolicy {
  ActionSpace space;
  MlpParams actor;
  Eigen::VectorXd log_std;

  static GaussianPolicy create(const ActionSpace& space, int input_dim,
                               const std::vector<int>& hidden,
                               double init_log_std, Rng& rng);

  Eigen::VectorXd mean(const Eigen::VectorXd& features) const;
  PolicySample sample(const Eigen::VectorXd& features, Rng& rng) const;
  /// squash(mean): the action used at evaluation time.
  alloc::Action deterministic(const Eigen::VectorXd& features) const;
  double log_prob(const Eigen::VectorXd& features,
                  const Eigen::VectorXd& raw) const;
};

}  // namespace cfee::ppo

#endif  // CFEE_PPO_POLICY_HPP_
