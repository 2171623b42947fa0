#include "cfee/ppo/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfee::ppo {

namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

int ActionSpace::dim() const {
  return static_cast<int>(free[0]) + static_cast<int>(free[1]) +
         static_cast<int>(free[2]);
}

double ActionSpace::lo(int coord) const {
  switch (coord) {
    case 0: return bounds.zeta_lo;
    case 1: return bounds.kappa_lo;
    default: return bounds.nu_lo;
  }
}

double ActionSpace::hi(int coord) const {
  switch (coord) {
    case 0: return bounds.zeta_hi;
    case 1: return bounds.kappa_hi;
    default: return bounds.nu_hi;
  }
}

alloc::Action ActionSpace::to_action(const Eigen::VectorXd& squashed) const {
  if (squashed.size() != dim()) {
    throw std::invalid_argument("ActionSpace::to_action: dimension mismatch");
  }
  std::array<double, 3> v{pinned.zeta, pinned.kappa, pinned.nu};
  int at = 0;
  for (int c = 0; c < 3; ++c) {
    if (free[c]) v[c] = squashed(at++);
  }
  return {v[0], v[1], v[2]};
}

ActionSpace ActionSpace::proposed(const alloc::ActionBounds& b) {
  return {b, {true, true, true}, {1.0, 0.0, 1.0}};
}

ActionSpace ActionSpace::all_aps(const alloc::ActionBounds& b) {
  return {b, {false, true, true}, {1.0, 0.0, 1.0}};
}

ActionSpace ActionSpace::activation_only(const alloc::ActionBounds& b) {
  return {b, {true, false, false}, {1.0, 0.0, 1.0}};
}

Eigen::VectorXd squash(const ActionSpace& space, const Eigen::VectorXd& raw) {
  Eigen::VectorXd out(raw.size());
  int at = 0;
  for (int c = 0; c < 3; ++c) {
    if (!space.free[c]) continue;
    out(at) = space.lo(c) + (space.hi(c) - space.lo(c)) * sigmoid(raw(at));
    ++at;
  }
  return out;
}

double squash_log_jacobian(const ActionSpace& space,
                           const Eigen::VectorXd& raw) {
  double total = 0.0;
  int at = 0;
  for (int c = 0; c < 3; ++c) {
    if (!space.free[c]) continue;
    const double u = raw(at++);
    // log(sigmoid(u) * (1 - sigmoid(u))) = -softplus(-u) - softplus(u)
    total += std::log(space.hi(c) - space.lo(c)) - softplus(-u) - softplus(u);
  }
  return total;
}

double gaussian_log_prob(const Eigen::VectorXd& raw,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (int i = 0; i < raw.size(); ++i) {
    const double z = (raw(i) - mean(i)) * std::exp(-log_std(i));
    total += -0.5 * z * z - log_std(i) - half_log_2pi;
  }
  return total;
}

GaussianPolicy GaussianPolicy::create(const ActionSpace& space, int input_dim,
                                      const std::vector<int>& hidden,
                                      double init_log_std, Rng& rng) {
  GaussianPolicy p;
  p.space = space;
  p.actor = init_params({input_dim, hidden, space.dim()}, rng, 0.01);
  p.log_std = Eigen::VectorXd::Constant(space.dim(), init_log_std);
  return p;
}

Eigen::VectorXd GaussianPolicy::mean(const Eigen::VectorXd& features) const {
  return forward(actor, features);
}

PolicySample GaussianPolicy::sample(const Eigen::VectorXd& features,
                                    Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd mu = mean(features);
  PolicySample s;
  s.raw.resize(mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    s.raw(i) = mu(i) + std::exp(log_std(i)) * normal(rng);
  }
  s.squashed = squash(space, s.raw);
  s.action = space.to_action(s.squashed);
  s.log_prob = gaussian_log_prob(s.raw, mu, log_std) -
               squash_log_jacobian(space, s.raw);
  return s;
}

alloc::Action GaussianPolicy::deterministic(
    const Eigen::VectorXd& features) const {
  return space.to_action(squash(space, mean(features)));
}

double GaussianPolicy::log_prob(const Eigen::VectorXd& features,
                                const Eigen::VectorXd& raw) const {
  return gaussian_log_prob(raw, mean(features), log_std) -
         squash_log_jacobian(space, raw);
}

}  // namespace cfee::ppo
