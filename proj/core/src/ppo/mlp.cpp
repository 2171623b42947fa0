#include "cfee/ppo/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfee::ppo {

namespace {

std::vector<int> layer_dims(const MlpArchitecture& arch) {
  std::vector<int> dims{arch.input_dim};
  dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
  dims.push_back(arch.output_dim);
  return dims;
}

Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd a(big, small);
  for (int j = 0; j < small; ++j) {
    for (int i = 0; i < big; ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small);
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return gain * (rows >= cols ? q : Eigen::MatrixXd(q.transpose()));
}

}  // namespace

long MlpParams::parameter_count() const {
  long n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool MlpParams::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const DenseLayer& l) {
    return l.weight.allFinite() && l.bias.allFinite();
  });
}

MlpParams zero_params(const MlpArchitecture& arch) {
  if (arch.input_dim < 1 || arch.output_dim < 1) {
    throw std::invalid_argument("MlpArchitecture: dims must be >= 1");
  }
  const auto dims = layer_dims(arch);
  MlpParams net{arch, {}};
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (dims[i + 1] < 1) throw std::invalid_argument("MlpArchitecture: width");
    net.layers.push_back({Eigen::MatrixXd::Zero(dims[i + 1], dims[i]),
                          Eigen::VectorXd::Zero(dims[i + 1])});
  }
  return net;
}

MlpParams init_params(const MlpArchitecture& arch, Rng& rng,
                      double output_gain) {
  MlpParams net = zero_params(arch);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    auto& w = net.layers[i].weight;
    const bool last = i + 1 == net.layers.size();
    w = orthogonal(static_cast<int>(w.rows()), static_cast<int>(w.cols()),
                   last ? output_gain : std::sqrt(2.0), rng);
  }
  return net;
}

Eigen::VectorXd forward(const MlpParams& net, const Eigen::VectorXd& x) {
  if (x.size() != net.arch.input_dim) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  Eigen::VectorXd h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    h = l.weight * h + l.bias;
    if (i + 1 < net.layers.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

Eigen::MatrixXd forward(const MlpParams& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache) {
  if (x.rows() != net.arch.input_dim) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    Eigen::MatrixXd z = l.weight * h;
    z.colwise() += l.bias;
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(z);
    }
    h = i + 1 < net.layers.size() ? Eigen::MatrixXd(z.cwiseMax(0.0))
                                  : std::move(z);
  }
  return h;
}

MlpParams backward(const MlpParams& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& grad_out) {
  MlpParams grad{net.arch, {}};
  grad.layers.resize(net.layers.size());
  Eigen::MatrixXd delta = grad_out;
  for (std::size_t ii = net.layers.size(); ii-- > 0;) {
    grad.layers[ii].weight = delta * cache.inputs[ii].transpose();
    grad.layers[ii].bias = delta.rowwise().sum();
    if (ii == 0) break;
    delta = net.layers[ii].weight.transpose() * delta;
    delta.array() *= (cache.pre[ii - 1].array() > 0.0).cast<double>();
  }
  return grad;
}

Eigen::VectorXd flatten(const MlpParams& net) {
  Eigen::VectorXd flat(net.parameter_count());
  long at = 0;
  for (const auto& l : net.layers) {
    flat.segment(at, l.weight.size()) =
        Eigen::Map<const Eigen::VectorXd>(l.weight.data(), l.weight.size());
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void unflatten(const Eigen::VectorXd& flat, MlpParams& net) {
  if (flat.size() != net.parameter_count()) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  long at = 0;
  for (auto& l : net.layers) {
    Eigen::Map<Eigen::VectorXd>(l.weight.data(), l.weight.size()) =
        flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

GradCheckReport grad_check(const MlpParams& net, double tol, Rng& rng,
                           int batch) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](int rows) {
    Eigen::MatrixXd m(rows, batch);
    for (int j = 0; j < batch; ++j) {
      for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
  };

  constexpr double kKinkMargin = 1e-3;
  ForwardCache cache;
  Eigen::MatrixXd x;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 1000) {
      throw std::runtime_error("grad_check: could not avoid ReLU kinks");
    }
    x = draw(net.arch.input_dim);
    forward(net, x, &cache);
    bool clear = true;
    for (std::size_t i = 0; i + 1 < cache.pre.size(); ++i) {
      if ((cache.pre[i].array().abs() < kKinkMargin).any()) clear = false;
    }
    if (clear) break;
  }
  const Eigen::MatrixXd y = draw(net.arch.output_dim);

  const Eigen::MatrixXd out = forward(net, x, &cache);
  const Eigen::VectorXd analytic = flatten(backward(net, cache, out - y));

  auto loss = [&](const MlpParams& p) {
    return 0.5 * (forward(p, x, nullptr) - y).squaredNorm();
  };
  constexpr double h = 1e-5;
  MlpParams probe = net;
  Eigen::VectorXd flat = flatten(net);
  GradCheckReport report;
  for (long i = 0; i < flat.size(); ++i) {
    const double saved = flat(i);
    flat(i) = saved + h;
    unflatten(flat, probe);
    const double up = loss(probe);
    flat(i) = saved - h;
    unflatten(flat, probe);
    const double down = loss(probe);
    flat(i) = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale =
        std::max({std::abs(analytic(i)), std::abs(numeric), 1e-6});
    const double rel = std::abs(analytic(i) - numeric) / scale;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace cfee::ppo
