#ifndef CFEE_ALLOC_HPP_
#define CFEE_ALLOC_HPP_

#include <vector>

#include "cfee/netgen.hpp"
#include "cfee/perf.hpp"

namespace cfee::alloc {

/// The three resource-allocation coefficients.
struct Action {
  double zeta = 1.0;   // AP activation ratio
  double kappa = 0.0;  // antenna concentration exponent
  double nu = 1.0;     // fractional power exponent

  friend bool operator==(const Action&, const Action&) = default;
};

struct ActionBounds {
  double zeta_lo = 0.05, zeta_hi = 1.0;
  double kappa_lo = 0.0, kappa_hi = 4.0;
  double nu_lo = 0.0, nu_hi = 4.0;

  bool contains(const Action& a) const;
  Action clamp(const Action& a) const;
};

/// Mean large-scale fading of each AP across users.
Eigen::VectorXd ap_scores(const Eigen::MatrixXd& beta);

/// Number of APs kept on for ratio zeta: max(1, round(zeta * M)).
int active_count(double zeta, int num_aps);

/// Highest-scoring APs (ties to the lower index), returned in index order.
std::vector<int> select_aps(const Eigen::VectorXd& scores, double zeta);

/// Active-antenna counts; 0 for APs outside `active`.
std::vector<int> allocate_antennas(const Eigen::VectorXd& scores,
                                   const std::vector<int>& active,
                                   double kappa, int antennas);

/// Fractional power coefficients, exactly saturating each active AP's
/// budget sum_k eta_mk gamma_mk = 1 / N_m.
Eigen::MatrixXd allocate_power(const Eigen::MatrixXd& gamma,
                               const std::vector<int>& n_active,
                               const std::vector<int>& active, double nu);

perf::AllocationDecision realize(const Action& action,
                                 const netgen::Scenario& sc, int antennas);

}  // namespace cfee::alloc

#endif  // CFEE_ALLOC_HPP_
