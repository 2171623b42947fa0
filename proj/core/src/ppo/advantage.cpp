#include "cfee/ppo/advantage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfee::ppo {

Eigen::VectorXd gae(std::span<const double> rewards,
                    std::span<const double> values,
                    std::span<const bool> dones, double bootstrap_value,
                    double discount, double lambda) {
  const auto n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("gae: length mismatch");
  }
  Eigen::VectorXd adv(static_cast<Eigen::Index>(n));
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double next_value = i + 1 < n ? values[i + 1] : bootstrap_value;
    const double delta =
        rewards[i] + discount * next_value * live - values[i];
    running = delta + discount * lambda * live * running;
    adv(static_cast<Eigen::Index>(i)) = running;
  }
  return adv;
}

Eigen::VectorXd discounted_returns(std::span<const double> rewards,
                                   std::span<const bool> dones,
                                   double bootstrap_value, double discount) {
  const auto n = rewards.size();
  if (dones.size() != n) throw std::invalid_argument("returns: length mismatch");
  Eigen::VectorXd ret(static_cast<Eigen::Index>(n));
  double running = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    if (dones[i]) running = 0.0;
    running = rewards[i] + discount * running;
    ret(static_cast<Eigen::Index>(i)) = running;
  }
  return ret;
}

Surrogate clipped_surrogate(const Eigen::VectorXd& log_prob_new,
                            const Eigen::VectorXd& log_prob_old,
                            const Eigen::VectorXd& advantages, double clip) {
  const auto n = log_prob_new.size();
  if (log_prob_old.size() != n || advantages.size() != n || n == 0) {
    throw std::invalid_argument("clipped_surrogate: length mismatch");
  }
  Surrogate s;
  s.grad_log_prob = Eigen::VectorXd::Zero(n);
  long clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = std::exp(log_prob_new(i) - log_prob_old(i));
    const double a = advantages(i);
    const double unclipped = ratio * a;
    const double bounded = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * a;
    if (unclipped <= bounded) {
      s.objective += unclipped;
      s.grad_log_prob(i) = unclipped / static_cast<double>(n);
    } else {
      s.objective += bounded;
      ++clipped;
    }
  }
  s.objective /= static_cast<double>(n);
  s.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  return s;
}

}  // namespace cfee::ppo
