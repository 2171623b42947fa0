#include "cfee/ppo/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "cfee/config.hpp"

namespace cfee::ppo {

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + s + "'");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

Optimizer::Optimizer(OptimizerKind kind, double lr, Eigen::Index size)
    : kind_(kind), lr_(lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("Optimizer: lr must be > 0");
  if (kind_ == OptimizerKind::kAdam) {
    m_ = Eigen::VectorXd::Zero(size);
    v_ = Eigen::VectorXd::Zero(size);
  }
}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != grad.size()) {
    throw std::invalid_argument("Optimizer::step: size mismatch");
  }
  if (kind_ == OptimizerKind::kSgd) {
    params -= lr_ * grad;
    return;
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -=
      lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

double clip_grad_norm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
  return norm;
}

}  // namespace cfee::ppo
