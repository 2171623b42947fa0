#ifndef CFEE_CONFIG_HPP_
#define CFEE_CONFIG_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace cfee {

using Rng = std::mt19937_64;

/// Positions are stored one point per row, columns (x, y) in meters.
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 2>;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Explicit geometry used instead of uniform placement (unit tests, replays).
struct PlacementOverride {
  Positions aps;
  Positions users;
  bool zero_shadowing = true;
};

/**
 * Physical and protocol constants of one cell-free deployment.
 *
 * Defaults reproduce the 40-AP / 20-user / 20-antenna reference setup.
 * Distances are in meters; `path_loss_unit_m` is the distance unit the
 * three-slope formula is evaluated in (1000 evaluates it in km, which is
 * the unit the 140.7 dB constant is calibrated for).
 */
struct SystemConfig {
  int num_aps = 40;
  int num_users = 20;
  int antennas = 20;

  double area_side = 1000.0;
  double d0 = 10.0;
  double d1 = 50.0;
  double path_loss_db = 140.7;
  double path_loss_unit_m = 1000.0;
  double shadow_sigma_db = 8.0;

  double bandwidth_hz = 2e7;
  double noise_figure_db = 9.0;
  int tau_c = 200;
  int tau_p = 20;

  double p_down_watts = 1.0;
  double p_pilot_watts = 0.2;
  double alpha_amp = 0.4;
  double p_tc_watts = 0.2;
  double p_fix_watts = 0.825;
  double p_bt_watts_per_gbps = 0.25;
  double se_min = 1.0;

  // Switched-off APs keep drawing the fixed backhaul power when set.
  bool idle_backhaul_power = false;

  std::optional<PlacementOverride> placement;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

/// Thermal noise power over the system bandwidth, in watts.
double noise_power(const SystemConfig& cfg);

/// Normalized downlink SNR p_down / N0.
double rho_d(const SystemConfig& cfg);

/// Normalized pilot SNR p_pilot / N0.
double rho_p(const SystemConfig& cfg);

/// Training prelog (tau_c - tau_p) / tau_c.
double prelog(const SystemConfig& cfg);

/// Derives an independent 64-bit seed from (master, stream, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index = 0);

/// Seeds a generator from a 64-bit seed through std::seed_seq.
Rng make_rng(std::uint64_t seed);

}  // namespace cfee

#endif  // CFEE_CONFIG_HPP_
