#ifndef CFEE_PERF_HPP_
#define CFEE_PERF_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cfee/config.hpp"
#include "cfee/netgen.hpp"

namespace cfee::perf {

/// Concrete antenna/power decision for one scenario.
struct AllocationDecision {
  std::vector<int> active;     // sorted AP indices
  std::vector<int> n_active;   // length M, 0 for inactive APs
  Eigen::MatrixXd eta;         // M x K, zero rows for inactive APs

  int total_antennas() const;
};

struct PerfReport {
  Eigen::VectorXd se_per_user;
  double se_sum = 0.0;
  double p_total_watts = 0.0;
  double ee_bits_per_joule = 0.0;
  Eigen::VectorXd qos_shortfall;

  double ee_mbits_per_joule() const { return ee_bits_per_joule * 1e-6; }
  double min_se() const;
  int qos_violations() const;
};

struct FeasibilityVerdict {
  std::vector<bool> qos_ok;          // per user: S_e,k >= S_ok
  Eigen::VectorXd qos_slack;         // S_e,k - S_ok
  std::vector<bool> power_ok;        // per AP: sum_k eta gamma <= 1/N_m
  Eigen::VectorXd power_slack;       // 1/N_m - sum_k eta gamma (0 if off)
  bool antennas_ok = true;           // N_m in {0..N}, N_m >= 1 iff active

  bool feasible() const;
};

/// Relative tolerance on the per-AP power budget.
inline constexpr double kPowerSlackTol = 1e-9;

/// Throws std::invalid_argument if dec is malformed for (M, K, N).
void validate_decision(const AllocationDecision& dec, int num_aps,
                       int num_users, int antennas);

/// Per-user SE from the closed form with the pilot cross-correlation factor
/// on the coherent interference term.
Eigen::VectorXd closed_form_se(const netgen::Scenario& sc,
                               const AllocationDecision& dec,
                               const SystemConfig& cfg);

/**
 * Monte Carlo estimate of per-user SE.
 *
 * Draws Rayleigh channels, pilot observations and MMSE estimates, applies
 * conjugate beamforming on the first N_m antennas of each active AP and
 * estimates the desired-signal, beamforming-uncertainty and inter-user
 * interference moments by sample averages. Realizations are processed in
 * fixed-size chunks with per-chunk seeds so the result does not depend on
 * `threads`.
 */
Eigen::VectorXd mc_se_oracle(const netgen::Scenario& sc,
                             const AllocationDecision& dec,
                             const SystemConfig& cfg, long n_realizations,
                             std::uint64_t seed, int threads = 1);

/// Variant with an explicit antenna mask per AP (true = active), used to
/// check that only the count of active antennas matters.
Eigen::VectorXd mc_se_oracle_masked(const netgen::Scenario& sc,
                                    const AllocationDecision& dec,
                                    const std::vector<std::vector<bool>>& mask,
                                    const SystemConfig& cfg,
                                    long n_realizations, std::uint64_t seed,
                                    int threads = 1);

double total_power(const AllocationDecision& dec, double se_sum,
                   const netgen::Scenario& sc, const SystemConfig& cfg);

/// B * S_e / P_total in bit/J. Throws std::domain_error when p_total <= 0.
double energy_efficiency(double bandwidth_hz, double se_sum, double p_total);

PerfReport evaluate(const netgen::Scenario& sc, const AllocationDecision& dec,
                    const SystemConfig& cfg);

FeasibilityVerdict check_feasibility(const netgen::Scenario& sc,
                                     const AllocationDecision& dec,
                                     const SystemConfig& cfg);

/// Column names of the one-row PerfReport serialization.
std::string csv_header();

std::string csv_row(std::uint64_t seed, double zeta, double kappa, double nu,
                    const AllocationDecision& dec, const PerfReport& report);

}  // namespace cfee::perf

#endif  // CFEE_PERF_HPP_
