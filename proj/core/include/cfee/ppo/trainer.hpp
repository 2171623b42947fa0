#ifndef CFEE_PPO_TRAINER_HPP_
#define CFEE_PPO_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cfee/env.hpp"
#include "cfee/ppo/advantage.hpp"
#include "cfee/ppo/optimizer.hpp"
#include "cfee/ppo/policy.hpp"

namespace cfee::ppo {

struct PpoHyper {
  double discount = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  int minibatch = 64;
  long total_steps = 300000;
  int rollout_horizon = 2048;
  int epochs_per_update = 10;
  std::vector<int> hidden{256, 256};
  // Raw std 1.3132: at a centred mean the squashed action has std 0.5 of the
  // half-range.
  double init_log_std = 0.2724686;
  double max_grad_norm = 0.5;
  double entropy_coef = 0.0;
  bool normalize_advantages = true;
  // Treat the episode-length cutoff as truncation and bootstrap through it.
  bool time_limit_bootstrap = true;
  // Critic regresses standardized returns, rescaled by running statistics.
  bool value_normalization = true;
  // Critic target: GAE lambda-return (advantage + value) instead of the
  // plain bootstrapped discounted return.
  bool lambda_return_targets = false;
  OptimizerKind optimizer = OptimizerKind::kAdam;

  void validate() const;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RolloutBuffer {
  std::vector<env::Transition> transitions;
  // V of the following state for transitions cut by the time limit, else 0.
  std::vector<double> timeout_values;
  Eigen::VectorXd returns;
  Eigen::VectorXd advantages;

  /// Fills returns (lambda-returns or bootstrapped discounted sums) and GAE
  /// advantages,
  /// normalized over the whole buffer when hyper.normalize_advantages.
  /// Time-limit ends add discount * timeout_value to their reward.
  void compute(double bootstrap_value, const PpoHyper& hyper);
  std::size_t size() const { return transitions.size(); }
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
};

/// Running mean and spread of observed returns.
struct ValueNormalizer {
  double mean = 0.0;
  double m2 = 0.0;
  long count = 0;

  double scale() const;
  void observe(const Eigen::VectorXd& returns);
};

/// Actor, critic and their optimizer state.
class PpoLearner {
 public:
  PpoLearner(GaussianPolicy policy, MlpParams critic, const PpoHyper& hyper);

  /// Shuffled minibatch passes over the buffer: clipped-surrogate ascent on
  /// the actor, squared-error descent on the critic.
  UpdateStats update(const RolloutBuffer& buffer, Rng& rng);

  double value(const Eigen::VectorXd& features) const;

  const GaussianPolicy& policy() const { return policy_; }
  const MlpParams& critic() const { return critic_; }
  const ValueNormalizer& value_normalizer() const { return value_norm_; }

 private:
  PpoHyper hyper_;
  GaussianPolicy policy_;
  MlpParams critic_;
  ValueNormalizer value_norm_;
  Optimizer actor_opt_;
  Optimizer critic_opt_;
};

struct TrainLogRow {
  long step = 0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_zeta = 0.0;
  double mean_kappa = 0.0;
  double mean_nu = 0.0;
};

struct TrainResult {
  GaussianPolicy policy;
  MlpParams critic;
  ValueNormalizer value_norm;
  env::FeatureNormalizer normalizer;
  std::vector<TrainLogRow> log;
  std::vector<double> step_rewards;
};

/// Full training loop: collect rollout_horizon steps, update, repeat until
/// total_steps environment steps. Pure function of its arguments.
TrainResult train(const SystemConfig& sys, const env::EnvConfig& env_cfg,
                  const ActionSpace& space, const PpoHyper& hyper,
                  std::uint64_t seed,
                  const std::function<void(const TrainLogRow&)>& on_update = {});

}  // namespace cfee::ppo

#endif  // CFEE_PPO_TRAINER_HPP_
