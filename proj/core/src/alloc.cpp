#include "cfee/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cfee::alloc {

bool ActionBounds::contains(const Action& a) const {
  return a.zeta >= zeta_lo && a.zeta <= zeta_hi && a.kappa >= kappa_lo &&
         a.kappa <= kappa_hi && a.nu >= nu_lo && a.nu <= nu_hi;
}

Action ActionBounds::clamp(const Action& a) const {
  return {std::clamp(a.zeta, zeta_lo, zeta_hi),
          std::clamp(a.kappa, kappa_lo, kappa_hi),
          std::clamp(a.nu, nu_lo, nu_hi)};
}

Eigen::VectorXd ap_scores(const Eigen::MatrixXd& beta) {
  return beta.rowwise().mean();
}

int active_count(double zeta, int num_aps) {
  const auto n = static_cast<int>(std::floor(zeta * num_aps + 0.5));
  return std::clamp(n, 1, num_aps);
}

std::vector<int> select_aps(const Eigen::VectorXd& scores, double zeta) {
  if (!(zeta > 0.0 && zeta <= 1.0)) {
    throw std::invalid_argument("select_aps: zeta must be in (0, 1]");
  }
  const int m_count = static_cast<int>(scores.size());
  const int keep = active_count(zeta, m_count);
  std::vector<int> order(m_count);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](int a, int b) {
                      if (scores(a) != scores(b)) return scores(a) > scores(b);
                      return a < b;
                    });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<int> allocate_antennas(const Eigen::VectorXd& scores,
                                   const std::vector<int>& active,
                                   double kappa, int antennas) {
  if (active.empty()) throw std::invalid_argument("allocate_antennas: empty");
  if (!(kappa >= 0.0)) throw std::invalid_argument("allocate_antennas: kappa");
  double best = 0.0;
  for (int m : active) best = std::max(best, scores(m));

  std::vector<int> counts(scores.size(), 0);
  for (int m : active) {
    // (I_m / I_max)^kappa equals I_m^kappa / I_max^kappa without overflow.
    const double w = std::pow(scores(m) / best, kappa);
    const auto n = static_cast<int>(std::floor(1.0 + (antennas - 1) * w));
    counts[m] = std::clamp(n, 1, antennas);
  }
  return counts;
}

Eigen::MatrixXd allocate_power(const Eigen::MatrixXd& gamma,
                               const std::vector<int>& n_active,
                               const std::vector<int>& active, double nu) {
  if (!(nu >= 0.0)) throw std::invalid_argument("allocate_power: nu < 0");
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(gamma.rows(), gamma.cols());
  for (int m : active) {
    const double top = gamma.row(m).maxCoeff();
    if (!(top > 0.0) || n_active[m] < 1) {
      throw std::invalid_argument("allocate_power: degenerate gamma row " +
                                  std::to_string(m));
    }
    // Normalized by the row maximum; the factor cancels in the ratio.
    const Eigen::ArrayXd rel = gamma.row(m).array().transpose() / top;
    const double denom = rel.pow(nu).sum();
    eta.row(m) =
        (rel.pow(nu - 1.0) / (denom * top * n_active[m])).matrix().transpose();
  }
  return eta;
}

perf::AllocationDecision realize(const Action& action,
                                 const netgen::Scenario& sc, int antennas) {
  const Eigen::VectorXd scores = ap_scores(sc.beta);
  perf::AllocationDecision dec;
  dec.active = select_aps(scores, action.zeta);
  dec.n_active = allocate_antennas(scores, dec.active, action.kappa, antennas);
  dec.eta = allocate_power(sc.gamma, dec.n_active, dec.active, action.nu);
  return dec;
}

}  // namespace cfee::alloc
