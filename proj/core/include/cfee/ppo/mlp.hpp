#ifndef CFEE_PPO_MLP_HPP_
#define CFEE_PPO_MLP_HPP_

#include <vector>

#include "cfee/config.hpp"

namespace cfee::ppo {

/// Fully connected network shape: ReLU on hidden layers, linear output.
struct MlpArchitecture {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 0;

  friend bool operator==(const MlpArchitecture&,
                         const MlpArchitecture&) = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Network parameters. Also used as the container for their gradients.
struct MlpParams {
  MlpArchitecture arch;
  std::vector<DenseLayer> layers;

  long parameter_count() const;
  bool all_finite() const;
};

/// Intermediate values of a batched forward pass, kept for backward().
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
};

MlpParams zero_params(const MlpArchitecture& arch);

/// Orthogonal initialization: gain sqrt(2) on hidden layers, `output_gain`
/// on the output layer, zero biases.
MlpParams init_params(const MlpArchitecture& arch, Rng& rng,
                      double output_gain);

Eigen::VectorXd forward(const MlpParams& net, const Eigen::VectorXd& x);

/// Batched forward pass; samples are columns of x.
Eigen::MatrixXd forward(const MlpParams& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache);

/// Reverse-mode pass: grad_out is dLoss/dOutput (out x batch); returns
/// dLoss/dParams accumulated over the batch.
MlpParams backward(const MlpParams& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& grad_out);

/// Parameters in declaration order: per layer, weight (column-major) then bias.
Eigen::VectorXd flatten(const MlpParams& net);
void unflatten(const Eigen::VectorXd& flat, MlpParams& net);

struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  long worst_index = -1;
};

/**
 * Compares backward() against central finite differences (h = 1e-5) for
 * the loss 0.5 * ||f(x) - y||^2 on a random batch. Inputs are redrawn
 * until every hidden pre-activation is away from the ReLU kink.
 */
GradCheckReport grad_check(const MlpParams& net, double tol, Rng& rng,
                           int batch = 4);

}  // namespace cfee::ppo

#endif  // CFEE_PPO_MLP_HPP_
