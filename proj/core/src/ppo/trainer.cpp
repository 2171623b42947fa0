#include "cfee/ppo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace cfee::ppo {

namespace {

constexpr std::uint64_t kPolicyStream = 0x706f6cULL;
constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;

Eigen::VectorXd actor_flat(const GaussianPolicy& p) {
  const Eigen::VectorXd net = flatten(p.actor);
  Eigen::VectorXd out(net.size() + p.log_std.size());
  out << net, p.log_std;
  return out;
}

void set_actor_flat(const Eigen::VectorXd& flat, GaussianPolicy& p) {
  const auto n = flat.size() - p.log_std.size();
  unflatten(flat.head(n), p.actor);
  p.log_std = flat.tail(p.log_std.size())
                  .cwiseMax(kLogStdMin)
                  .cwiseMin(kLogStdMax);
}

}  // namespace

void PpoHyper::validate() const {
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda");
  if (!(clip > 0.0)) throw ConfigError("clip > 0");
  if (!(lr_actor > 0.0 && lr_critic > 0.0)) throw ConfigError("learning rates");
  if (minibatch < 1 || rollout_horizon < 1 || epochs_per_update < 1 ||
      total_steps < 1) {
    throw ConfigError("minibatch/rollout_horizon/epochs/total_steps >= 1");
  }
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden widths >= 1");
  }
}

void RolloutBuffer::compute(double bootstrap_value, const PpoHyper& hyper) {
  const auto n = transitions.size();
  std::vector<double> rewards(n), values(n);
  std::unique_ptr<bool[]> dones(new bool[n]);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = transitions[i].reward;
    if (i < timeout_values.size()) {
      rewards[i] += hyper.discount * timeout_values[i];
    }
    values[i] = transitions[i].value;
    dones[i] = transitions[i].done;
  }
  const std::span<const bool> done_span(dones.get(), n);
  advantages = gae(rewards, values, done_span, bootstrap_value, hyper.discount,
                   hyper.gae_lambda);
  if (hyper.lambda_return_targets) {
    returns = advantages + Eigen::Map<const Eigen::VectorXd>(
                               values.data(), static_cast<Eigen::Index>(n));
  } else {
    returns = discounted_returns(rewards, done_span, bootstrap_value,
                                 hyper.discount);
  }
  if (hyper.normalize_advantages && n > 1) {
    const double mean = advantages.mean();
    const double var =
        (advantages.array() - mean).square().sum() / static_cast<double>(n);
    advantages = ((advantages.array() - mean) / (std::sqrt(var) + 1e-8))
                     .matrix();
  }
}

double ValueNormalizer::scale() const {
  if (count < 2) return 1.0;
  return std::max(std::sqrt(m2 / static_cast<double>(count - 1)), 1e-6);
}

void ValueNormalizer::observe(const Eigen::VectorXd& returns) {
  // Chan et al. pairwise merge of (count, mean, m2).
  const auto n = static_cast<double>(returns.size());
  if (n == 0) return;
  const double b_mean = returns.mean();
  const double b_m2 = (returns.array() - b_mean).square().sum();
  const double total = static_cast<double>(count) + n;
  const double delta = b_mean - mean;
  mean += delta * n / total;
  m2 += b_m2 + delta * delta * static_cast<double>(count) * n / total;
  count += static_cast<long>(n);
}

PpoLearner::PpoLearner(GaussianPolicy policy, MlpParams critic,
                       const PpoHyper& hyper)
    : hyper_(hyper),
      policy_(std::move(policy)),
      critic_(std::move(critic)),
      actor_opt_(hyper.optimizer, hyper.lr_actor,
                 policy_.actor.parameter_count() + policy_.log_std.size()),
      critic_opt_(hyper.optimizer, hyper.lr_critic, critic_.parameter_count()) {
  hyper_.validate();
}

double PpoLearner::value(const Eigen::VectorXd& features) const {
  const double v = forward(critic_, features)(0);
  if (!hyper_.value_normalization) return v;
  return value_norm_.mean + value_norm_.scale() * v;
}

UpdateStats PpoLearner::update(const RolloutBuffer& buffer, Rng& rng) {
  const auto n = static_cast<int>(buffer.size());
  if (n == 0) return {};
  const int obs_dim = policy_.actor.arch.input_dim;
  const int act_dim = policy_.space.dim();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  if (hyper_.value_normalization) value_norm_.observe(buffer.returns);
  const double v_shift = hyper_.value_normalization ? value_norm_.mean : 0.0;
  const double v_scale = hyper_.value_normalization ? value_norm_.scale() : 1.0;

  UpdateStats stats;
  long batches = 0;
  ForwardCache actor_cache;
  ForwardCache critic_cache;

  for (int epoch = 0; epoch < hyper_.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += hyper_.minibatch) {
      const int b = std::min(hyper_.minibatch, n - start);
      Eigen::MatrixXd x(obs_dim, b);
      Eigen::MatrixXd raw(act_dim, b);
      Eigen::VectorXd old_logp(b), adv(b), ret(b), jac(b);
      for (int i = 0; i < b; ++i) {
        const int idx = order[start + i];
        const auto& tr = buffer.transitions[idx];
        x.col(i) = tr.state;
        raw.col(i) = tr.raw_action;
        old_logp(i) = tr.log_prob;
        adv(i) = buffer.advantages(idx);
        ret(i) = (buffer.returns(idx) - v_shift) / v_scale;
        jac(i) = squash_log_jacobian(policy_.space, tr.raw_action);
      }

      // Actor.
      const Eigen::MatrixXd mu = forward(policy_.actor, x, &actor_cache);
      const Eigen::VectorXd inv_var = (-2.0 * policy_.log_std).array().exp();
      Eigen::VectorXd new_logp(b);
      for (int i = 0; i < b; ++i) {
        new_logp(i) = gaussian_log_prob(raw.col(i), mu.col(i),
                                        policy_.log_std) - jac(i);
      }
      const Surrogate sur =
          clipped_surrogate(new_logp, old_logp, adv, hyper_.clip);

      // Loss = -objective - entropy_coef * entropy.
      const Eigen::MatrixXd diff = raw - mu;
      Eigen::MatrixXd grad_mu(act_dim, b);
      Eigen::VectorXd grad_log_std =
          Eigen::VectorXd::Constant(act_dim, -hyper_.entropy_coef);
      // dlogp/dmu = (u - mu) / sigma^2, dlogp/dlogstd = (u - mu)^2 / sigma^2 - 1
      for (int i = 0; i < b; ++i) {
        const double g = -sur.grad_log_prob(i);
        grad_mu.col(i) = g * diff.col(i).cwiseProduct(inv_var);
        grad_log_std.array() +=
            g * (diff.col(i).array().square() * inv_var.array() - 1.0);
      }
      const MlpParams actor_grad =
          backward(policy_.actor, actor_cache, grad_mu);
      Eigen::VectorXd actor_g(actor_grad.parameter_count() + act_dim);
      actor_g << flatten(actor_grad), grad_log_std;

      // Critic.
      const Eigen::MatrixXd v = forward(critic_, x, &critic_cache);
      const Eigen::RowVectorXd err = v.row(0) - ret.transpose();
      const double value_loss = 0.5 * err.squaredNorm() / b;
      const MlpParams critic_grad = backward(
          critic_, critic_cache, Eigen::MatrixXd(err / static_cast<double>(b)));
      Eigen::VectorXd critic_g = flatten(critic_grad);

      const double policy_loss = -sur.objective;
      if (!std::isfinite(policy_loss) || !std::isfinite(value_loss) ||
          !actor_g.allFinite() || !critic_g.allFinite()) {
        throw TrainingDiverged("PPO update produced a non-finite loss");
      }

      clip_grad_norm(actor_g, hyper_.max_grad_norm);
      clip_grad_norm(critic_g, hyper_.max_grad_norm);

      Eigen::VectorXd actor_params = actor_flat(policy_);
      actor_opt_.step(actor_params, actor_g);
      set_actor_flat(actor_params, policy_);

      Eigen::VectorXd critic_params = flatten(critic_);
      critic_opt_.step(critic_params, critic_g);
      unflatten(critic_params, critic_);

      stats.policy_loss += policy_loss;
      stats.value_loss += value_loss;
      stats.clip_fraction += sur.clip_fraction;
      ++batches;
    }
  }
  stats.policy_loss /= static_cast<double>(batches);
  stats.value_loss /= static_cast<double>(batches);
  stats.clip_fraction /= static_cast<double>(batches);
  return stats;
}

TrainResult train(const SystemConfig& sys, const env::EnvConfig& env_cfg,
                  const ActionSpace& space, const PpoHyper& hyper,
                  std::uint64_t seed,
                  const std::function<void(const TrainLogRow&)>& on_update) {
  hyper.validate();
  env::Environment environment(sys, env_cfg, seed);
  Rng rng = make_rng(derive_seed(seed, kPolicyStream));

  const int obs_dim = environment.observation_dim();
  GaussianPolicy policy = GaussianPolicy::create(space, obs_dim, hyper.hidden,
                                                 hyper.init_log_std, rng);
  MlpParams critic = init_params({obs_dim, hyper.hidden, 1}, rng, 1.0);
  PpoLearner learner(std::move(policy), std::move(critic), hyper);

  TrainResult result;
  result.normalizer = environment.normalizer();
  result.step_rewards.reserve(static_cast<std::size_t>(hyper.total_steps));

  env::EnvState state = environment.reset();
  long steps = 0;
  RolloutBuffer buffer;
  while (steps < hyper.total_steps) {
    const long horizon =
        std::min<long>(hyper.rollout_horizon, hyper.total_steps - steps);
    buffer.transitions.clear();
    buffer.transitions.reserve(static_cast<std::size_t>(horizon));
    buffer.timeout_values.assign(static_cast<std::size_t>(horizon), 0.0);
    TrainLogRow row;
    for (long t = 0; t < horizon; ++t) {
      const PolicySample s = learner.policy().sample(state.features, rng);
      env::Transition tr;
      tr.state = state.features;
      tr.raw_action = s.raw;
      tr.action = s.action;
      tr.log_prob = s.log_prob;
      tr.value = learner.value(state.features);
      const env::StepResult res = environment.step(s.action);
      tr.reward = res.reward;
      tr.done = res.done;
      tr.next_state = res.next.features;
      buffer.transitions.push_back(std::move(tr));
      result.step_rewards.push_back(res.reward);
      row.mean_reward += res.reward;
      row.mean_zeta += res.applied.zeta;
      row.mean_kappa += res.applied.kappa;
      row.mean_nu += res.applied.nu;
      ++steps;
      state = res.done ? environment.reset() : res.next;
      if (res.done && hyper.time_limit_bootstrap) {
        // Slots are i.i.d. across the cutoff, so the next episode's first
        // state stands in for the unobserved successor.
        buffer.timeout_values[static_cast<std::size_t>(t)] =
            learner.value(state.features);
      }
    }
    const double bootstrap = buffer.transitions.back().done
                                 ? 0.0
                                 : learner.value(state.features);
    buffer.compute(bootstrap, hyper);
    const UpdateStats stats = learner.update(buffer, rng);

    const double inv = 1.0 / static_cast<double>(horizon);
    row.step = steps;
    row.mean_reward *= inv;
    row.mean_zeta *= inv;
    row.mean_kappa *= inv;
    row.mean_nu *= inv;
    row.policy_loss = stats.policy_loss;
    row.value_loss = stats.value_loss;
    result.log.push_back(row);
    if (on_update) on_update(row);
  }
  result.policy = learner.policy();
  result.critic = learner.critic();
  result.value_norm = learner.value_normalizer();
  return result;
}

}  // namespace cfee::ppo
