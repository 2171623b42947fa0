#ifndef CFEE_PPO_OPTIMIZER_HPP_
#define CFEE_PPO_OPTIMIZER_HPP_

#include <string>

#include <Eigen/Dense>

namespace cfee::ppo {

enum class OptimizerKind { kAdam, kSgd };

OptimizerKind parse_optimizer(const std::string& s);
std::string to_string(OptimizerKind kind);

/// First-order minimizer over a flat parameter vector.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, Eigen::Index size);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  double learning_rate() const { return lr_; }

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

/// Rescales grad in place so its norm is at most max_norm (no-op if <= 0).
/// Returns the norm before clipping.
double clip_grad_norm(Eigen::VectorXd& grad, double max_norm);

}  // namespace cfee::ppo

#endif  // CFEE_PPO_OPTIMIZER_HPP_
