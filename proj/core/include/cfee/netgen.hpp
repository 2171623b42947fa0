#ifndef CFEE_NETGEN_HPP_
#define CFEE_NETGEN_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cfee/config.hpp"

namespace cfee::netgen {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Pilot index per user plus the induced |phi_j^H phi_k|^2 matrix.
struct PilotAssignment {
  std::vector<int> index;
  Eigen::MatrixXd xcorr;
};

/**
 * One large-scale realization of the network.
 *
 * beta and gamma are M x K and linear. gamma holds the mean-square of the
 * MMSE estimate per active antenna, so 0 < gamma < beta elementwise.
 */
struct Scenario {
  Positions ap_positions;
  Positions user_positions;
  Eigen::MatrixXd beta;
  PilotAssignment pilots;
  Eigen::MatrixXd gamma;
  std::uint64_t seed = 0;

  int num_aps() const { return static_cast<int>(beta.rows()); }
  int num_users() const { return static_cast<int>(beta.cols()); }
  const Eigen::MatrixXd& pilot_xcorr() const { return pilots.xcorr; }
};

/// Three-slope path loss in dB (a negative number) at distance d meters.
double path_loss_db(double d, const SystemConfig& cfg);

/// Euclidean distance on the torus [0, side)^2.
double wrap_distance(Point p, Point q, double side);

PilotAssignment assign_pilots(int num_users, int tau_p, std::uint64_t seed);

Eigen::MatrixXd compute_gamma(const Eigen::MatrixXd& beta,
                              const Eigen::MatrixXd& xcorr, int tau_p,
                              double rho_p);

/// n points i.i.d. uniform on [0, side)^2.
Positions draw_positions(int n, double side, Rng& rng);

/// Shadowing draws in dB, i.i.d. Normal(0, sigma^2).
Eigen::MatrixXd draw_shadowing(int rows, int cols, double sigma_db, Rng& rng);

/// Assembles a scenario from explicit geometry, shadowing and pilots.
Scenario make_scenario(const SystemConfig& cfg, Positions aps, Positions users,
                       const Eigen::MatrixXd& shadow_db,
                       PilotAssignment pilots, std::uint64_t seed);

/// Pure function of (cfg, seed).
Scenario generate_scenario(const SystemConfig& cfg, std::uint64_t seed);

/// Same as generate_scenario but with the AP grid held fixed.
Scenario generate_scenario(const SystemConfig& cfg, const Positions& aps,
                           std::uint64_t seed);

/// Writes scenario_meta.csv, beta.csv, gamma.csv and positions.csv into dir.
void write_scenario(const Scenario& sc, const SystemConfig& cfg,
                    const std::filesystem::path& dir);

/// Reads a bundle written by write_scenario. Throws std::runtime_error.
Scenario read_scenario(const std::filesystem::path& dir);

}  // namespace cfee::netgen

#endif  // CFEE_NETGEN_HPP_
