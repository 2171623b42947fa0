#ifndef CFEE_PPO_ADVANTAGE_HPP_
#define CFEE_PPO_ADVANTAGE_HPP_

#include <span>

#include <Eigen/Dense>

namespace cfee::ppo {

/**
 * Generalized advantage estimates.
 *
 * values[t] is V(s_t). The value following the last step is
 * `bootstrap_value`; a set done flag cuts both the TD target and the
 * accumulation at that step.
 */
Eigen::VectorXd gae(std::span<const double> rewards,
                    std::span<const double> values,
                    std::span<const bool> dones, double bootstrap_value,
                    double discount, double lambda);

/// R_t = r_t + discount * R_{t+1}, restarting after done steps.
Eigen::VectorXd discounted_returns(std::span<const double> rewards,
                                   std::span<const bool> dones,
                                   double bootstrap_value, double discount);

struct Surrogate {
  double objective = 0.0;          // batch mean
  Eigen::VectorXd grad_log_prob;   // d objective / d log pi_new per sample
  double clip_fraction = 0.0;
};

/// Clipped surrogate mean_t min(rho_t A_t, clip(rho_t, 1-eps, 1+eps) A_t).
Surrogate clipped_surrogate(const Eigen::VectorXd& log_prob_new,
                            const Eigen::VectorXd& log_prob_old,
                            const Eigen::VectorXd& advantages, double clip);

}  // namespace cfee::ppo

#endif  // CFEE_PPO_ADVANTAGE_HPP_
